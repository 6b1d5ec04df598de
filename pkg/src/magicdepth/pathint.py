"""Recursive path-integral amplitudes ``<x|U|0>`` for ``U`` with ``d`` diagonal
magic layers.

The layer list is split in two halves and a resolution of the identity is
inserted between them; single-layer pieces are evaluated exactly from an
affine form.  Evaluation is depth first, so memory stays polynomial.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, clifford_word, layered_form
from .core import DyadicPhase, PauliString
from .estimate import PhaseOracle, _word_phase
from .stabilizer import AffineForm, conjugate_pauli, invert_word

DEFAULT_BUDGET = 1 << 30
BUDGET_ENV = "MAGICDEPTH_BUDGET"
# lower halves are reused across output strings; the cache is bounded
CACHE_LIMIT = 4096


def parse_budget(text) -> int:
    """``1073741824``, ``2^30``, ``2**30`` or ``1<<30``."""
    t = str(text).replace(" ", "")
    for op, fn in (("**", pow), ("^", pow), ("<<", lambda a, b: a << b)):
        if op in t:
            a, b = t.split(op, 1)
            return fn(int(a), int(b))
    return int(t)


def default_budget() -> int:
    env = os.environ.get(BUDGET_ENV, "").strip()
    return parse_budget(env) if env else DEFAULT_BUDGET


class BudgetExceeded(RuntimeError):
    def __init__(self, estimate: int, budget: int):
        super().__init__(f"estimated branch count {estimate} exceeds budget {budget}")
        self.estimate, self.budget = estimate, budget


class _CliffordBlock:
    """``U_c`` as ``U_c|0>`` (affine form) plus the images ``U_c X_j U_c^dag``."""

    def __init__(self, n: int, word, phase: DyadicPhase = DyadicPhase()):
        self.n = n
        self.word = list(word)
        self.phase = phase
        psi = AffineForm.zero_state(n).apply_word(self.word)
        psi.global_phase = psi.global_phase + phase
        self.psi = psi
        ims = [conjugate_pauli(PauliString.single(n, j, "X"), self.word) for j in range(n)]
        self.ix = np.array([p.x for p in ims], np.int64).reshape(n, n)
        self.iz = np.array([p.z for p in ims], np.int64).reshape(n, n)
        self.ik = np.array([p.i_power for p in ims], np.int64)
        self.scale = psi.global_scale * psi.global_phase.to_complex()
        # phase of X^{y_j} X^{y_j'} reordering: z-part of image j against x-part of image j'
        self._cross = np.triu((self.iz @ self.ix.T) & 1, 1)

    def image(self, y):
        """``U_c X^y U_c^dag`` as ``(x_bits, z_bits, i_power)``."""
        x = np.zeros(self.n, np.int64)
        z = np.zeros(self.n, np.int64)
        k = 0
        for j in np.flatnonzero(y):
            k += self.ik[j] + 2 * int(z @ self.ix[j])
            x ^= self.ix[j]
            z ^= self.iz[j]
        return x, z, k % 4

    def amplitude(self, x, y) -> complex:
        """``<x|U_c|y>``."""
        px, pz, k = self.image(y)
        w = np.asarray(x, np.int64) ^ px
        t = self.psi.coordinates(w.astype(np.uint8))
        if t is None:
            return 0j
        q = self.psi.form.evaluate(t)
        octs = (2 * k + 4 * (int(pz @ w) & 1) + q) % 8
        return self.scale * np.exp(1j * np.pi * octs / 4)

    def images(self, Y):
        """Batched :meth:`image` over rows of ``Y``."""
        Y = np.asarray(Y, np.int64)
        px = (Y @ self.ix) & 1
        pz = (Y @ self.iz) & 1
        k = Y @ self.ik + 2 * np.einsum("mi,ij,mj->m", Y, self._cross, Y)
        return px, pz, k % 4

    def amplitudes(self, X, Y) -> np.ndarray:
        """``<x_m|U_c|y_m>`` for paired rows (either side may be a single row)."""
        X = np.atleast_2d(np.asarray(X, np.int64))
        Y = np.atleast_2d(np.asarray(Y, np.int64))
        px, pz, k = self.images(Y)
        W = X ^ px
        m = W.shape[0]
        psi = self.psi
        if psi.r:
            T = (W ^ psi.offset)[:, psi.pivots]
            back = ((T @ psi.basis.T.astype(np.int64)) & 1) ^ psi.offset
            q = psi.form.evaluate_batch(T)
        else:
            T = np.zeros((m, 0), np.int64)
            back = np.broadcast_to(psi.offset.astype(np.int64), W.shape)
            q = np.full(m, psi.form.c)
        member = (back == W).all(axis=1)
        octs = (2 * k + 4 * (np.einsum("mi,mi->m", pz, W) & 1) + q) % 8
        return np.where(member, self.scale * np.exp(1j * np.pi * octs / 4), 0)

    def support(self, y):
        """Parameter matrix and offset of the support of ``U_c|y>``."""
        px, _, _ = self.image(y)
        return self.psi.basis, (self.psi.offset ^ px.astype(np.uint8))


@dataclass
class LayerStack:
    """``U = U_tail D_d U_{c,d} ... D_1 U_{c,1}``."""

    n: int
    blocks: list
    oracles: list
    tail: _CliffordBlock | None = None
    meta: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return len(self.blocks)

    @classmethod
    def from_circuit(cls, c: Circuit) -> "LayerStack":
        lf = layered_form(c)
        blocks, oracles = [], []
        for lay in lf.layers:
            w, ph = clifford_word(lay.clifford)
            blocks.append(_CliffordBlock(c.n, w, ph))
            oracles.append(PhaseOracle.from_gates(c.n, lay.magic))
        tail = None
        if lf.tail:
            w, ph = clifford_word(lf.tail)
            if w or not ph.is_zero():
                tail = _CliffordBlock(c.n, w, ph)
        return cls(c.n, blocks, oracles, tail)

    @classmethod
    def from_layers(cls, n: int, layers, tail=None) -> "LayerStack":
        """``layers`` is a list of ``(clifford, oracle_or_gates)``."""
        blocks, oracles = [], []
        for cl, d in layers:
            w, ph = _word_phase(cl)
            blocks.append(_CliffordBlock(n, w, ph))
            oracles.append(d if isinstance(d, PhaseOracle) else PhaseOracle.from_gates(n, d or []))
        tb = None
        if tail is not None:
            w, ph = _word_phase(tail)
            tb = _CliffordBlock(n, w, ph)
        return cls(n, blocks, oracles, tb)


def single_layer_amplitude(clifford, d, x, y) -> complex:
    """``<x|D U_c|y>``."""
    if not isinstance(clifford, _CliffordBlock):
        x = np.asarray(x)
        w, ph = _word_phase(clifford)
        clifford = _CliffordBlock(x.size, w, ph)
    amp = clifford.amplitude(x, y)
    if amp == 0 or d is None or d.is_trivial:
        return amp
    return amp * np.exp(1j * d.evaluate(np.asarray(x, np.uint8)))


def _all_points(n):
    idx = np.arange(1 << n)
    return ((idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1).astype(np.uint8)


def _affine_points(A, b):
    r = A.shape[1]
    T = ((np.arange(1 << r)[:, None] >> np.arange(r)[None, :]) & 1).astype(np.int64)
    return (((T @ A.T.astype(np.int64)) & 1) ^ b).astype(np.uint8) if r else b[None, :].copy()


def _affine_amplitudes(a: AffineForm, W) -> np.ndarray:
    W = np.atleast_2d(np.asarray(W, np.int64))
    if a.r:
        T = (W ^ a.offset)[:, a.pivots]
        back = ((T @ a.basis.T.astype(np.int64)) & 1) ^ a.offset
        q = a.form.evaluate_batch(T)
        member = (back == W).all(axis=1)
    else:
        q = np.full(W.shape[0], a.form.c)
        member = (W == a.offset).all(axis=1)
    amp = a.global_scale * a.global_phase.to_complex() * np.exp(1j * np.pi * q / 4)
    return np.where(member, amp, 0)


class _Evaluator:
    def __init__(self, stack: LayerStack, prune: bool):
        self.s = stack
        self.prune = prune
        self.branches = 0
        self.max_depth = 0
        self.cache = stack.meta.setdefault("lower_cache", {}) if stack.meta.get("cache", True) else None

    def leaves(self, i, X, Y) -> np.ndarray:
        """``<x|D_i U_i|y>`` for paired rows of basis states."""
        blk, d = self.s.blocks[i], self.s.oracles[i]
        amp = blk.amplitudes(X, Y)
        self.branches += amp.size
        if d.is_trivial:
            return amp
        X = np.atleast_2d(np.asarray(X, np.uint8))
        live = amp != 0
        if X.shape[0] == 1:
            return amp * np.exp(1j * d.evaluate_batch(X)[0]) if live.any() else amp
        if live.any():
            amp[live] *= np.exp(1j * d.evaluate_batch(X[live]))
        return amp

    def state_leaves(self, i, phi: AffineForm, Y) -> np.ndarray:
        """``<phi|D_i U_i|y>`` for each row ``y``, summed over the support of ``phi``."""
        Y = np.atleast_2d(np.asarray(Y, np.int64))
        if "phi_support" not in self.__dict__:
            _, W = phi.support()
            self.phi_support = W.astype(np.int64)
            self.phi_weights = np.conj(_affine_amplitudes(phi, W))
            d = self.s.oracles[i]
            if not d.is_trivial:
                self.phi_weights = self.phi_weights * np.exp(1j * d.evaluate_batch(W))
        W, wts = self.phi_support, self.phi_weights
        blk = self.s.blocks[i]
        out = np.empty(Y.shape[0], complex)
        step = max(1, (1 << 16) // W.shape[0])
        for s0 in range(0, Y.shape[0], step):
            Yc = Y[s0:s0 + step]
            amp = blk.amplitudes(np.tile(W, (Yc.shape[0], 1)), np.repeat(Yc, W.shape[0], axis=0))
            out[s0:s0 + step] = amp.reshape(Yc.shape[0], W.shape[0]) @ wts
        self.branches += Y.shape[0]
        return out

    def candidates(self, i, h, y):
        y = np.asarray(y)
        if self.prune and h == i:
            A, b = self.s.blocks[i].support(y)
            return _affine_points(A, b)
        return _all_points(self.s.n)

    def run(self, i, j, left, y, depth=1) -> np.ndarray:
        """``<l|L_j ... L_i|y>`` for every left row ``l`` (a single entry for a state)."""
        self.max_depth = max(self.max_depth, depth)
        if i == j:
            if left[0] == "basis":
                return self.leaves(i, left[1], y)
            return self.state_leaves(i, left[1], y)
        h = i + (j - i + 1) // 2 - 1
        Z, low = self.lower(i, h, y, depth)
        live = np.flatnonzero(low)
        rows = left[1].shape[0] if left[0] == "basis" else 1
        if live.size == 0:
            return np.zeros(rows, complex)
        if h + 1 == j and rows == 1:
            self.max_depth = max(self.max_depth, depth + 1)
            if left[0] == "basis":
                up = self.leaves(j, left[1], Z[live])
            else:
                up = self.state_leaves(j, left[1], Z[live])
            return np.array([np.dot(up, low[live])])
        total = np.zeros(rows, complex)
        for m in live:
            total += self.run(h + 1, j, left, Z[m], depth + 1) * low[m]
        return total

    def lower(self, i, h, y, depth):
        """Candidates ``z`` and ``<z|L_h ... L_i|y>``; these do not depend on the output."""
        key = (i, h, y.tobytes(), self.prune)
        hit = self.cache.get(key) if self.cache is not None else None
        if hit is not None:
            return hit
        Z = self.candidates(i, h, y)
        low = self.run(i, h, ("basis", Z), y, depth + 1)
        if self.cache is not None and len(self.cache) < CACHE_LIMIT:
            self.cache[key] = (Z, low)
        return Z, low


def estimate_branches(stack: LayerStack, prune: bool = True) -> int:
    """Upper bound on leaf evaluations for one amplitude."""
    n = stack.n

    def count(i, j):
        if i == j:
            return 1
        h = i + (j - i + 1) // 2 - 1
        width = 1 << (stack.blocks[i].psi.r if prune and h == i else n)
        return width * (count(i, h) + count(h + 1, j))

    return count(0, stack.d - 1) if stack.d else 1


@dataclass
class PathResult:
    value: complex
    branches: int
    bound: int
    estimated: int
    recursion_depth: int

    def to_dict(self) -> dict:
        return {"value": [self.value.real, self.value.imag], "branches": self.branches,
                "bound": self.bound, "estimated_branches": self.estimated,
                "recursion_depth": self.recursion_depth}


def path_integral_amplitude(stack, x, prune: bool = True, budget: int | None = None,
                            full: bool = False):
    """``<x|U|0>``; ``full`` returns a :class:`PathResult` with the branch count."""
    if isinstance(stack, Circuit):
        stack = LayerStack.from_circuit(stack)
    x = np.asarray(x, np.uint8).reshape(-1)
    if x.size != stack.n:
        raise ValueError(f"bitstring has {x.size} bits, circuit {stack.n} qubits")
    budget = default_budget() if budget is None else budget
    est = estimate_branches(stack, prune)
    if est > budget:
        raise BudgetExceeded(est, budget)
    d = stack.d
    bound = (2 * max(d, 1)) ** (stack.n + 1)
    zero = np.zeros(stack.n, np.uint8)
    if d == 0:
        blk = stack.tail or _CliffordBlock(stack.n, [])
        val = blk.amplitude(x, zero)
        res = PathResult(complex(val), 0, bound, 0, 0)
        return res if full else res.value
    if stack.tail is not None:
        phi = AffineForm.basis_state(x).apply_word(invert_word(stack.tail.word))
        phi.global_phase = phi.global_phase - stack.tail.phase
        left = ("state", phi)
    else:
        left = ("basis", x)
    ev = _Evaluator(stack, prune)
    val = ev.run(0, d - 1, left if left[0] == "state" else ("basis", x[None, :]), zero)[0]
    res = PathResult(complex(val), ev.branches, bound, est, ev.max_depth)
    return res if full else res.value
