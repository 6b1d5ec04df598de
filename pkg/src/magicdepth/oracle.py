"""Brute-force reference engines used to validate everything else.

Nothing here is clever on purpose.  Qubit 0 is the most significant bit of a
basis index.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import PauliString, bits_to_index

DEFAULT_CAP = 20

_H = np.array([[1, 1], [1, -1]], complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], complex)
_Y = np.array([[0, -1j], [1j, 0]], complex)
_Z = np.diag([1, -1]).astype(complex)
_S = np.diag([1, 1j])
_CNOT = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
_SWAP = np.eye(4, dtype=complex)[[0, 2, 1, 3]]

CLIFFORD_MATRICES = {
    "I": np.eye(2, dtype=complex), "H": _H, "X": _X, "Y": _Y, "Z": _Z,
    "S": _S, "SDG": _S.conj(), "CNOT": _CNOT, "CX": _CNOT,
    "CZ": np.diag([1, 1, 1, -1]).astype(complex), "SWAP": _SWAP,
}


class DenseState:
    """A ``2**n`` amplitude vector with in-place gate application."""

    def __init__(self, n: int, amps=None, cap: int = DEFAULT_CAP):
        if n > cap:
            raise ValueError(f"dense simulation refused: n={n} exceeds cap {cap}")
        self.n = n
        if amps is None:
            amps = np.zeros(1 << n, complex)
            amps[0] = 1
        self.amps = np.array(amps, complex).reshape(1 << n)

    @classmethod
    def basis(cls, bits, cap: int = DEFAULT_CAP) -> "DenseState":
        st = cls(len(bits), cap=cap)
        st.amps[:] = 0
        st.amps[bits_to_index(bits)] = 1
        return st

    def copy(self) -> "DenseState":
        return DenseState(self.n, self.amps.copy(), cap=max(self.n, DEFAULT_CAP))

    def _tensor(self):
        return self.amps.reshape((2,) * self.n) if self.n else self.amps.reshape(())

    def apply_matrix(self, mat, qubits: Sequence[int]):
        qubits = list(qubits)
        k = len(qubits)
        mat = np.asarray(mat, complex).reshape((2,) * (2 * k))
        psi = self._tensor()
        out = np.tensordot(mat, psi, axes=(list(range(k, 2 * k)), qubits))
        # tensordot puts the acted-on axes first
        order = qubits + [q for q in range(self.n) if q not in qubits]
        self.amps = np.moveaxis(out, list(range(self.n)), order).reshape(-1)
        return self

    def _local_index(self, qubits):
        idx = np.arange(1 << self.n)
        loc = np.zeros_like(idx)
        for q in qubits:
            loc = (loc << 1) | ((idx >> (self.n - 1 - q)) & 1)
        return loc

    def apply_phase_table(self, angles, qubits: Sequence[int]):
        """Multiply ``|x>`` by ``exp(i*angles[x_S])`` (local big-endian index)."""
        angles = np.asarray(angles, float)
        self.amps = self.amps * np.exp(1j * angles[self._local_index(qubits)])
        return self

    def apply_phase_function(self, fn, qubits: Sequence[int] | None = None):
        """``fn(bits_matrix) -> angles`` evaluated on every basis state."""
        qubits = list(range(self.n)) if qubits is None else list(qubits)
        idx = np.arange(1 << self.n)
        bits = ((idx[:, None] >> (self.n - 1 - np.asarray(qubits))[None, :]) & 1).astype(np.uint8)
        self.amps = self.amps * np.exp(1j * np.asarray(fn(bits), float))
        return self

    def apply_permutation(self, perm, qubits: Sequence[int]):
        """``|x_S> -> |perm[x_S]>`` on the local register ``qubits``."""
        perm = np.asarray(perm, np.int64)
        qubits = list(qubits)
        idx = np.arange(1 << self.n)
        loc = self._local_index(qubits)
        new_loc = perm[loc]
        out_idx = idx.copy()
        for pos, q in enumerate(qubits):
            bit = (new_loc >> (len(qubits) - 1 - pos)) & 1
            shift = self.n - 1 - q
            out_idx = (out_idx & ~(1 << shift)) | (bit << shift)
        out = np.zeros_like(self.amps)
        out[out_idx] = self.amps
        self.amps = out
        return self

    def apply_gate(self, name: str, qubits: Sequence[int]):
        return self.apply_matrix(CLIFFORD_MATRICES[name.upper() if name != "S†" else "SDG"], qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def apply_pauli(p: PauliString, vec) -> np.ndarray:
    vec = np.asarray(vec, complex)
    n = p.n
    idx = np.arange(1 << n)
    w = 1 << (n - 1 - np.arange(n)) if n else np.zeros(0, np.int64)
    xmask = int(np.dot(p.x.astype(np.int64), w))
    zmask = int(np.dot(p.z.astype(np.int64), w))
    par = np.bitwise_count((idx & zmask).astype(np.uint64)).astype(np.int64) & 1
    out = np.zeros_like(vec)
    out[idx ^ xmask] = vec * (1j ** p.i_power) * (1 - 2 * par)
    return out


def expectation(state, p: PauliString) -> float:
    vec = state.amps if isinstance(state, DenseState) else np.asarray(state, complex)
    val = np.vdot(vec, apply_pauli(p, vec))
    if not p.is_hermitian():
        return complex(val)
    return float(val.real)


def amplitude(state, x) -> complex:
    vec = state.amps if isinstance(state, DenseState) else np.asarray(state, complex)
    if isinstance(x, (int, np.integer)):
        return complex(vec[int(x)])
    return complex(vec[bits_to_index(x)])


def distribution(state, qubits: Sequence[int] | None = None) -> np.ndarray:
    vec = state.amps if isinstance(state, DenseState) else np.asarray(state, complex)
    n = int(np.log2(vec.size))
    probs = np.abs(vec) ** 2
    if qubits is None:
        return probs
    qubits = list(qubits)
    rest = [q for q in range(n) if q not in qubits]
    t = probs.reshape((2,) * n).transpose(qubits + rest).reshape(1 << len(qubits), -1)
    return t.sum(axis=1)


def total_variation_distance(p, q) -> float:
    """``0.5 * sum |p - q|``; inputs need not be normalized."""
    p = np.asarray(p, float).reshape(-1)
    q = np.asarray(q, float).reshape(-1)
    if p.size != q.size:
        raise ValueError(f"length mismatch: {p.size} vs {q.size}")
    return float(0.5 * np.abs(p - q).sum())


def _iqp_terms(iqp):
    if hasattr(iqp, "terms") and hasattr(iqp, "n"):
        return iqp.n, [tuple(t) for t in iqp.terms]
    n, terms = iqp
    return int(n), [tuple(t) for t in terms]


def iqp3_amplitude_bruteforce(iqp, x=None, cap: int = 28) -> Fraction:
    """``<x|H^n D H^n|0>`` for ``D = (-1)^{f}``, ``f`` a sum of monomials mod 2.

    ``iqp`` is ``(n, terms)`` with terms as tuples of variable indices.
    """
    n, terms = _iqp_terms(iqp)
    if n > cap:
        raise ValueError(f"brute force refused: n={n} exceeds cap {cap}")
    total = 0
    chunk = 1 << min(n, 20)
    xs = np.zeros(n, np.int64) if x is None else np.asarray(x, np.int64)
    for start in range(0, 1 << n, chunk):
        idx = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
        f = (bits @ xs) & 1
        for t in terms:
            if len(t) == 0:
                f ^= 1
            else:
                f ^= np.bitwise_and.reduce(bits[:, list(t)], axis=1)
        total += int(idx.size - 2 * f.sum())
    return Fraction(total, 1 << n)


def apply_gate_dense(state: DenseState, g) -> DenseState:
    """Apply a :class:`~magicdepth.circuit.Gate` to a dense state."""
    if g.name == "H":
        return state.apply_matrix(CLIFFORD_MATRICES["H"], g.qubits)
    if g.is_diagonal:
        if g.name == "ORACLE":
            return state.apply_phase_function(g.oracle_angles, g.qubits)
        return state.apply_phase_table([p.angle for p in g.phase_table()], g.qubits)
    state.apply_phase_table([p.angle for p in g.phase_table()], g.qubits)
    return state.apply_permutation(g.permutation(), g.qubits)


def simulate(c, init=None, cap: int = DEFAULT_CAP) -> DenseState:
    """Dense state ``U|init>`` (default ``|0...0>``)."""
    if c.n > cap:
        raise ValueError(f"dense simulation refused: n={c.n} exceeds cap {cap}")
    if init is None:
        st = DenseState(c.n, cap=cap)
    elif isinstance(init, DenseState):
        st = init.copy()
    elif np.ndim(init) == 1 and len(init) == c.n and c.n != 1 << c.n:
        st = DenseState.basis(init, cap=cap)
    else:
        st = DenseState(c.n, init, cap=cap)
    for g in c.gates:
        apply_gate_dense(st, g)
    return st


def unitary(c, cap: int = 12) -> np.ndarray:
    """Full matrix of a circuit, column ``j`` is ``U|j>``."""
    if c.n > cap:
        raise ValueError(f"unitary construction refused: n={c.n} exceeds cap {cap}")
    dim = 1 << c.n
    cols = []
    for j in range(dim):
        v = np.zeros(dim, complex)
        v[j] = 1
        cols.append(simulate(c, DenseState(c.n, v, cap=cap), cap=cap).amps)
    return np.array(cols).T


class SparseState:
    """Dictionary of nonzero amplitudes; fine for wide circuits with a small support."""

    def __init__(self, n: int, amps: dict | None = None, max_support: int = 1 << 20):
        self.n = n
        self.amps = {0: 1 + 0j} if amps is None else dict(amps)
        self.max_support = max_support

    @classmethod
    def basis(cls, bits, **kw) -> "SparseState":
        return cls(len(bits), {bits_to_index(bits): 1 + 0j}, **kw)

    def _shift(self, q):
        return self.n - 1 - q

    def apply_gate(self, g) -> "SparseState":
        if g.name == "H":
            s = 1 << self._shift(g.qubits[0])
            r = 1 / np.sqrt(2)
            out: dict = {}
            for i, a in self.amps.items():
                sign = -1 if i & s else 1
                out[i & ~s] = out.get(i & ~s, 0) + r * a
                out[i | s] = out.get(i | s, 0) + sign * r * a
            self.amps = {i: a for i, a in out.items() if abs(a) > 1e-14}
        else:
            shifts = [self._shift(q) for q in g.qubits]
            k = len(shifts)
            mask = sum(1 << s for s in shifts)
            if g.name == "ORACLE":
                keys = list(self.amps)
                bits = np.array([[(i >> s) & 1 for s in shifts] for i in keys], np.int64)
                ang = g.oracle_angles(bits) if keys else []
                self.amps = {i: self.amps[i] * np.exp(1j * t) for i, t in zip(keys, ang)}
                return self
            ph = [p.to_complex() for p in g.phase_table()]
            perm = g.permutation()
            out = {}
            for i, a in self.amps.items():
                loc = 0
                for s in shifts:
                    loc = (loc << 1) | ((i >> s) & 1)
                new = perm[loc]
                j = i & ~mask
                for pos, s in enumerate(shifts):
                    j |= ((new >> (k - 1 - pos)) & 1) << s
                out[j] = a * ph[loc]
            self.amps = out
        if len(self.amps) > self.max_support:
            raise ValueError(f"sparse simulation refused: support {len(self.amps)} exceeds {self.max_support}")
        return self

    def expectation(self, p: PauliString):
        # python ints: n may exceed 63
        xmask = bits_to_index(p.x.tolist()) if self.n else 0
        zmask = bits_to_index(p.z.tolist()) if self.n else 0
        val = 0j
        for i, a in self.amps.items():
            b = self.amps.get(i ^ xmask)
            if b is not None:
                val += np.conj(b) * a * (1j ** p.i_power) * (-1) ** bin(i & zmask).count("1")
        return float(val.real) if p.is_hermitian() else complex(val)

    def amplitude(self, bits) -> complex:
        return complex(self.amps.get(bits_to_index(bits), 0))

    def to_dense(self) -> np.ndarray:
        v = np.zeros(1 << self.n, complex)
        for i, a in self.amps.items():
            v[i] = a
        return v


def simulate_sparse(c, init=None, max_support: int = 1 << 20) -> SparseState:
    st = SparseState(c.n, max_support=max_support) if init is None else SparseState.basis(init, max_support=max_support)
    for g in c.gates:
        st.apply_gate(g)
    return st
