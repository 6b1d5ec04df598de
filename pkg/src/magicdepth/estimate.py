"""Additive-error Monte-Carlo estimates for circuits ``U_cr D U_cl`` with a single
diagonal layer ``D``.

A sample draws a family member ``P_a`` and a uniform point ``x`` of the
support of ``U_cl|0>``.  ``P_a`` is split as (product of stabilizers) times a
diagonal Pauli, so the sample value only needs the diagonal phases of ``D``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _accel
from ._accel import njit
from .circuit import Circuit, Gate, IQP3, clifford_word, layered_form
from .core import DyadicPhase, PauliString
from .stabilizer import (
    AffineForm,
    StabilizerTableau,
    canonicalize,
    conjugate_pauli,
    gf2,
    inner_product,
    invert_word,
    to_affine_form,
)

PRECOMPUTE_LIMIT = 1 << 16


# --- phase oracles --------------------------------------------------------------

@dataclass
class PhaseOracle:
    """Diagonal ``D = sum_x exp(i phi(x)) |x><x|``; ``fn`` maps bit rows to angles."""

    n: int
    fn: Callable
    cost: str = "O(n)"
    kind: str = "black-box"

    def evaluate_batch(self, bits) -> np.ndarray:
        bits = np.atleast_2d(np.asarray(bits, np.uint8))
        if bits.shape[0] == 0:
            return np.zeros(0)
        return np.asarray(self.fn(bits), float).reshape(bits.shape[0])

    def evaluate(self, bits) -> float:
        return float(self.evaluate_batch(np.asarray(bits, np.uint8)[None, :])[0])

    @property
    def is_trivial(self) -> bool:
        return self.kind == "trivial"

    @classmethod
    def trivial(cls, n: int) -> "PhaseOracle":
        return cls(n, lambda b: np.zeros(b.shape[0]), "O(1)", "trivial")

    @classmethod
    def from_gates(cls, n: int, gates) -> "PhaseOracle":
        gates = list(gates)
        for g in gates:
            if not g.is_diagonal:
                raise ValueError(f"{g} is not diagonal")
        if not gates:
            return cls.trivial(n)

        tables, black = [], []
        for g in gates:
            if g.name == "ORACLE":
                black.append(g)
            else:
                w = 1 << (g.k - 1 - np.arange(g.k))
                tables.append((list(g.qubits), w, np.array([p.angle for p in g.phase_table()])))

        def fn(bits):
            out = np.zeros(bits.shape[0])
            for qs, w, ang in tables:
                out += ang[bits[:, qs].astype(np.int64) @ w]
            for g in black:
                out += g.oracle_angles(bits[:, list(g.qubits)])
            return out

        return cls(n, fn, f"O({len(gates)})", "product-of-local-tables")

    @classmethod
    def from_iqp3(cls, iqp) -> "PhaseOracle":
        iqp = IQP3.coerce(iqp)
        return cls(iqp.n, lambda bits: np.pi * iqp.f(bits), f"O({len(iqp.terms)})", "IQP3-polynomial")


def push_through(d: PhaseOracle, p: PauliString) -> PhaseOracle:
    """Oracle of ``D'`` with ``D^dag P D = P D'``: ``x -> -(phi(x ^ p.x) - phi(x))``."""
    flip = p.x.astype(np.uint8)
    if not flip.any():
        return PhaseOracle.trivial(d.n)
    return PhaseOracle(d.n, lambda bits: -(d.evaluate_batch(bits ^ flip) - d.evaluate_batch(bits)),
                       f"2*{d.cost}", "push-through")


# --- configuration and results ------------------------------------------------------

@dataclass
class EstimatorConfig:
    epsilon: float = 0.05
    delta: float = 0.05
    seed: int = 0
    samples_override: int | None = None
    batch: int = 1 << 15

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    @property
    def groups(self) -> int:
        return max(1, math.ceil(8 * math.log(2 / self.delta)))

    @property
    def group_size(self) -> int:
        if self.samples_override is not None:
            return max(1, math.ceil(self.samples_override / self.groups))
        return math.ceil(4 / self.epsilon ** 2)

    def scaled(self, epsilon: float, delta: float) -> "EstimatorConfig":
        return EstimatorConfig(epsilon, delta, self.seed, self.samples_override, self.batch)


@dataclass
class EstimateResult:
    value: float | complex
    imag_residue: float
    samples_used: int
    groups: int
    sigma: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        v = self.value
        if isinstance(v, complex):
            v = {"re": v.real, "im": v.imag}
        out = {"value": v,
               "imag_residue": self.imag_residue, "samples_used": self.samples_used,
               "groups": self.groups, "sigma": self.sigma}
        out.update(self.extra)
        return out


def median_of_means(values: np.ndarray, groups: int):
    """Median over ``groups`` equal blocks of the block means (real and imaginary apart)."""
    means = values.reshape(groups, -1).mean(axis=1)
    return complex(np.median(means.real), np.median(means.imag))


# --- Pauli families ---------------------------------------------------------------

class PauliFamily:
    """Uniform average of ``coeff_a * P_a``; ``members(idx)`` returns row arrays."""

    size: int
    n: int

    def members(self, idx):
        raise NotImplementedError


class ExplicitFamily(PauliFamily):
    def __init__(self, paulis, coeffs=None):
        paulis = list(paulis)
        if not paulis:
            raise ValueError("empty Pauli family")
        self.n = paulis[0].n
        self.size = len(paulis)
        self.x = np.array([p.x for p in paulis], np.uint8)
        self.z = np.array([p.z for p in paulis], np.uint8)
        self.k = np.array([p.i_power for p in paulis], np.int64)
        self.coeffs = np.ones(self.size, complex) if coeffs is None else np.asarray(coeffs, complex)
        for p in paulis:
            if not p.is_hermitian():
                raise ValueError(f"family member {p} is not Hermitian")

    def members(self, idx):
        return self.x[idx], self.z[idx], self.k[idx], self.coeffs[idx]


class ZProductFamily(PauliFamily):
    """``{(-1)^{x.z} * prod_i G_i^{z_i}}`` over ``z`` in ``{0,1}^k``; averages to the projector onto ``x``."""

    def __init__(self, images, x_bits):
        self.images = list(images)
        self.kq = len(self.images)
        self.n = self.images[0].n if self.images else 0
        self.size = 1 << self.kq
        self.x_bits = np.asarray(x_bits, np.int64).reshape(-1)
        if self.x_bits.size != self.kq:
            raise ValueError("target bitstring length does not match the qubit list")
        self.gx = np.array([g.x for g in self.images], np.uint8).reshape(self.kq, self.n)
        self.gz = np.array([g.z for g in self.images], np.uint8).reshape(self.kq, self.n)
        self.gk = np.array([g.i_power for g in self.images], np.int64)

    def members(self, idx):
        idx = np.asarray(idx, np.int64)
        m = idx.size
        x = np.zeros((m, self.n), np.uint8)
        z = np.zeros((m, self.n), np.uint8)
        k = np.zeros(m, np.int64)
        sign = np.zeros(m, np.int64)
        for i in range(self.kq):
            on = ((idx >> (self.kq - 1 - i)) & 1).astype(bool)
            cross = (z[on].astype(np.int64) @ self.gx[i].astype(np.int64)) & 1
            k[on] += self.gk[i] + 2 * cross
            x[on] ^= self.gx[i]
            z[on] ^= self.gz[i]
            sign[on] ^= self.x_bits[i] & 1
        return x, z, k % 4, (1 - 2 * sign).astype(complex)


def z_images(u_cr, qubits, n: int):
    word = _word(u_cr)
    return [conjugate_pauli(PauliString.single(n, q, "Z"), word, dagger=True) for q in qubits]


# --- stabilizer reduction kernel ----------------------------------------------------

@njit(cache=True)
def _reduce_numba(px, pz, pk, xx, xz, xk, piv):
    m, n = px.shape
    r = xx.shape[0]
    ok = np.ones(m, np.bool_)
    dz = np.zeros((m, n), np.uint8)
    dk = np.zeros(m, np.int64)
    res = np.zeros(n, np.uint8)
    sz = np.zeros(n, np.uint8)
    for i in range(m):
        for q in range(n):
            res[q] = px[i, q]
            sz[q] = 0
        sk = 0
        for j in range(r):
            if res[piv[j]]:
                c = 0
                for q in range(n):
                    c += sz[q] & xx[j, q]
                sk += xk[j] + 2 * c
                for q in range(n):
                    sz[q] ^= xz[j, q]
                    res[q] ^= xx[j, q]
        bad = False
        for q in range(n):
            if res[q]:
                bad = True
                break
        if bad:
            ok[i] = False
            continue
        c = 0
        for q in range(n):
            c += sz[q] & px[i, q]
            dz[i, q] = sz[q] ^ pz[i, q]
        dk[i] = (sk + pk[i] + 2 * c) % 4
    return ok, dz, dk


def _reduce_numpy(px, pz, pk, xx, xz, xk, piv):
    m, n = px.shape
    res = px.copy()
    sz = np.zeros((m, n), np.uint8)
    sk = np.zeros(m, np.int64)
    for j in range(xx.shape[0]):
        on = res[:, piv[j]].astype(bool)
        if not on.any():
            continue
        c = (sz[on].astype(np.int64) @ xx[j].astype(np.int64))
        sk[on] += xk[j] + 2 * c
        sz[on] ^= xz[j]
        res[on] ^= xx[j]
    ok = ~res.any(axis=1)
    c = (sz.astype(np.int64) * px).sum(axis=1)
    dk = (sk + pk + 2 * c) % 4
    dz = np.where(ok[:, None], sz ^ pz, 0).astype(np.uint8)
    return ok, dz, np.where(ok, dk, 0)


def reduce_paulis(canon, px, pz, pk):
    """For each row ``P``: whether ``P_X`` lies in the X-block span, and the diagonal
    remainder ``P~ = (prod S_j^{s_j}) P`` as ``(ok, z_bits, i_power)``."""
    px = np.ascontiguousarray(px, np.uint8)
    pz = np.ascontiguousarray(pz, np.uint8)
    pk = np.ascontiguousarray(pk, np.int64)
    args = (px, pz, pk, np.ascontiguousarray(canon.xx, np.uint8), np.ascontiguousarray(canon.xz, np.uint8),
            np.ascontiguousarray(canon.xk, np.int64), np.ascontiguousarray(canon.x_pivots, np.int64))
    if _accel.USE_NUMBA:
        return _reduce_numba(*args)
    return _reduce_numpy(*args)


def solve_xlayer(canon, p_x: PauliString):
    """``s`` with ``prod_j (X part of S_X,j)^{s_j} = p_x``, or ``None``."""
    if p_x.z.any():
        raise ValueError("p_x must be X-type")
    res = p_x.x.copy()
    s = np.zeros(canon.xx.shape[0], np.uint8)
    for j, p in enumerate(canon.x_pivots):
        if res[p]:
            s[j] = 1
            res ^= canon.xx[j]
    return None if res.any() else s


# --- problem setup ----------------------------------------------------------------

def _word_phase(c):
    if c is None:
        return [], DyadicPhase()
    if isinstance(c, Circuit):
        return clifford_word(c.gates)
    c = list(c)
    if c and isinstance(c[0], Gate):
        return clifford_word(c)
    return c, DyadicPhase()


def _word(c):
    return _word_phase(c)[0]


@dataclass
class DepthOneProblem:
    """``U = U_cr D U_cl``."""

    n: int
    u_cl: list
    d: PhaseOracle
    u_cr: list
    phase: DyadicPhase = DyadicPhase()

    @classmethod
    def from_circuit(cls, c: Circuit) -> "DepthOneProblem":
        lf = layered_form(c)
        if lf.d > 1:
            raise ValueError(f"circuit has magic depth {lf.d}; one diagonal layer expected")
        if lf.d == 0:
            w, ph = _word_phase(lf.tail)
            return cls(c.n, w, PhaseOracle.trivial(c.n), [], ph)
        layer = lf.layers[0]
        wl, pl = _word_phase(layer.clifford)
        wr, pr = _word_phase(lf.tail)
        return cls(c.n, wl, PhaseOracle.from_gates(c.n, layer.magic), wr, pl + pr)


def _problem(u_cl, d, u_cr, n=None) -> DepthOneProblem:
    if isinstance(u_cl, DepthOneProblem):
        return u_cl
    if n is None:
        if isinstance(d, PhaseOracle):
            n = d.n
        elif isinstance(u_cl, Circuit):
            n = u_cl.n
        else:
            raise ValueError("qubit count unknown: pass u_cl as a Circuit or d as a PhaseOracle")
    if d is None:
        d = PhaseOracle.trivial(n)
    elif not isinstance(d, PhaseOracle):
        d = PhaseOracle.from_gates(n, d)
    wl, pl = _word_phase(u_cl)
    wr, pr = _word_phase(u_cr)
    return DepthOneProblem(n, wl, d, wr, pl + pr)


class _Sampler:
    """Per-sample values ``coeff * P~(x) * exp(i phi'(x))`` for a problem and family."""

    def __init__(self, prob: DepthOneProblem, family: PauliFamily):
        self.prob = prob
        self.family = family
        tab = StabilizerTableau.from_circuit(prob.n, prob.u_cl)
        self.canon = canonicalize(tab)
        aff = to_affine_form(tab)
        self.A = aff.basis.astype(np.int64)
        self.b = aff.offset.astype(np.int64)
        self.r = aff.r
        self.table = None
        if family.size <= PRECOMPUTE_LIMIT:
            self.table = self._members(np.arange(family.size))

    def _members(self, idx):
        x, z, k, coeff = self.family.members(idx)
        ok, dz, dk = reduce_paulis(self.canon, x, z, k)
        return x, coeff * ok, dz, dk

    def values(self, a_idx, t) -> np.ndarray:
        if self.table is not None:
            x, coeff, dz, dk = (v[a_idx] for v in self.table)
        else:
            x, coeff, dz, dk = self._members(a_idx)
        pts = (((t @ self.A.T) & 1) ^ self.b).astype(np.uint8) if self.r else np.broadcast_to(
            self.b.astype(np.uint8), (len(a_idx), self.prob.n)).copy()
        out = np.zeros(len(a_idx), complex)
        live = coeff != 0
        if not live.any():
            return out
        pts_l = pts[live]
        flips = x[live]
        d = self.prob.d
        dphi = 0.0 if d.is_trivial else -(d.evaluate_batch(pts_l ^ flips) - d.evaluate_batch(pts_l))
        par = (dz[live].astype(np.int64) * pts_l).sum(axis=1) & 1
        ang = np.pi / 2 * dk[live] + np.pi * par + dphi
        out[live] = coeff[live] * np.exp(1j * ang)
        return out

    def draw(self, rng, m):
        a = rng.integers(0, self.family.size, size=m) if self.family.size > 1 else np.zeros(m, np.int64)
        t = rng.integers(0, 2, size=(m, self.r), dtype=np.int64)
        return self.values(a, t)

    def enumerate_mean(self) -> complex:
        """Mean over every ``(a, t)``; equals the exact value."""
        total = 0j
        T = ((np.arange(1 << self.r)[:, None] >> np.arange(self.r)[None, :]) & 1).astype(np.int64)
        for a in range(self.family.size):
            total += self.values(np.full(T.shape[0], a), T).sum()
        return total / (self.family.size << self.r)


def _run(sampler: _Sampler, cfg: EstimatorConfig, extra=None) -> EstimateResult:
    K, M = cfg.groups, cfg.group_size
    vals = np.empty((K, M), complex)
    for g in range(K):
        rng = np.random.default_rng([cfg.seed, g])
        for s in range(0, M, cfg.batch):
            m = min(cfg.batch, M - s)
            vals[g, s:s + m] = sampler.draw(rng, m)
    est = median_of_means(vals, K)
    sigma = float(np.sqrt(vals.real.var() / vals.size)) if vals.size > 1 else 0.0
    return EstimateResult(est.real, est.imag, K * M, K, sigma, extra or {})


def estimate_observable(u_cl, d, family, cfg: EstimatorConfig | None = None, u_cr=None) -> EstimateResult:
    """Median-of-means estimate of ``<0|U^dag P U|0>`` averaged over ``family``.

    ``family`` may be a PauliString, a list of them, or a :class:`PauliFamily`.
    """
    cfg = cfg or EstimatorConfig()
    prob = _problem(u_cl, d, u_cr)
    fam = _family(family, prob)
    return _run(_Sampler(prob, fam), cfg)


def _family(family, prob: DepthOneProblem) -> PauliFamily:
    if isinstance(family, PauliString):
        family = [family]
    if isinstance(family, PauliFamily):
        fam = family
    else:
        fam = ExplicitFamily(family)
    if fam.n != prob.n:
        raise ValueError(f"family acts on {fam.n} qubits, circuit on {prob.n}")
    if prob.u_cr and isinstance(fam, ExplicitFamily):
        ps = [conjugate_pauli(PauliString(fam.x[i], fam.z[i], fam.k[i]), prob.u_cr, dagger=True)
              for i in range(fam.size)]
        fam = ExplicitFamily(ps, fam.coeffs)
    return fam


def exact_family_mean(u_cl, d, family, u_cr=None) -> complex:
    """Full enumeration of the sampler over ``(a, t)``."""
    prob = _problem(u_cl, d, u_cr)
    return _Sampler(prob, _family(family, prob)).enumerate_mean()


def estimate_probability(u_cl, d, u_cr, x, cfg: EstimatorConfig | None = None, qubits=None) -> EstimateResult:
    """``p(x)`` on ``qubits`` (default all) via the signed Z-product family."""
    cfg = cfg or EstimatorConfig()
    prob = _problem(u_cl, d, u_cr)
    qubits = list(range(prob.n)) if qubits is None else list(qubits)
    fam = ZProductFamily(z_images(prob.u_cr, qubits, prob.n), x)
    return _run(_Sampler(prob, fam), cfg)


def estimate_marginal(u_cl, d, u_cr, qubits, cfg: EstimatorConfig | None = None):
    """All ``2^k`` marginal probabilities, each to ``2 eps / 2^k`` with failure ``delta / 2^k``.

    One set of samples serves every cell: a sample for ``z`` contributes
    ``(-1)^{x.z} v(z)`` to cell ``x``.
    """
    cfg = cfg or EstimatorConfig()
    prob = _problem(u_cl, d, u_cr)
    qubits = list(qubits)
    k = len(qubits)
    if k == 0:
        return np.ones(1), EstimateResult(1.0, 0.0, 0, 0)
    if k > 20:
        raise ValueError(f"k={k} marginal cells exceed the supported range")
    sub = cfg.scaled(2 * cfg.epsilon / (1 << k), cfg.delta / (1 << k))
    fam = ZProductFamily(z_images(prob.u_cr, qubits, prob.n), np.zeros(k, np.int64))
    sampler = _Sampler(prob, fam)
    K, M = sub.groups, sub.group_size
    cells = np.arange(1 << k)
    sums = np.zeros((K, 1 << k), complex)
    for g in range(K):
        rng = np.random.default_rng([cfg.seed, g])
        for s in range(0, M, cfg.batch):
            m = min(cfg.batch, M - s)
            a = rng.integers(0, fam.size, size=m)
            t = rng.integers(0, 2, size=(m, sampler.r), dtype=np.int64)
            v = sampler.values(a, t)
            # sign (-1)^{popcount(cell & a)} per cell
            par = np.bitwise_count((cells[None, :] & a[:, None]).astype(np.uint64)).astype(np.int64) & 1
            sums[g] += ((1 - 2 * par) * v[:, None]).sum(axis=0)
    means = sums / M
    est = np.median(means.real, axis=0)
    res = EstimateResult(float(est.sum()), float(np.abs(np.median(means.imag, axis=0)).max()), K * M, K)
    return est, res


def sample_marginal(u_cl, d, u_cr, qubits, cfg: EstimatorConfig | None = None, n_samples: int = 1,
                    return_probs: bool = False):
    """Samples of ``qubits`` (rows of bits) from the clipped, renormalized marginal estimate."""
    cfg = cfg or EstimatorConfig()
    qubits = list(qubits)
    k = len(qubits)
    if k == 0:
        out = np.zeros((n_samples if n_samples else 1, 0), np.uint8)
        return (out, np.ones(1)) if return_probs else out
    est, _ = estimate_marginal(u_cl, d, u_cr, qubits, cfg)
    q = np.clip(est, 0, 1)
    if q.sum() == 0:
        q = np.ones_like(q)
    q = q / q.sum()
    rng = np.random.default_rng([cfg.seed, 1 << 62])
    idx = rng.choice(q.size, size=n_samples, p=q)
    out = ((idx[:, None] >> (k - 1 - np.arange(k))[None, :]) & 1).astype(np.uint8)
    return (out, q) if return_probs else out


# --- amplitudes ------------------------------------------------------------------

def _amplitude_setup(prob: DepthOneProblem, x):
    x = np.asarray(x, np.uint8).reshape(-1)
    # exact global phases matter here, so no canonical tableau detour
    psi = AffineForm.zero_state(prob.n).apply_word(prob.u_cl)
    psi.global_phase = psi.global_phase + prob.phase
    phi = AffineForm.basis_state(x).apply_word(invert_word(prob.u_cr))
    M = np.concatenate([psi.basis, phi.basis], axis=1)
    rhs = psi.offset ^ phi.offset
    if M.shape[1] == 0:
        sol = (np.zeros(0, np.uint8), np.zeros((0, 0), np.uint8)) if not rhs.any() else None
    else:
        sol = gf2.solve_affine(M, rhs)
    return psi, phi, sol


def _amplitude_values(prob, psi, phi, sol, w):
    z0, K = sol
    rp = psi.r
    wk = w @ K.T.astype(np.int64) if K.shape[1] else np.zeros((w.shape[0], K.shape[0]), np.int64)
    coords = (wk + z0.astype(np.int64)) & 1
    tp, tq = coords[:, :rp], coords[:, rp:]
    y = (((tp @ psi.basis.T.astype(np.int64)) & 1) ^ psi.offset).astype(np.uint8) if rp else np.broadcast_to(
        psi.offset, (w.shape[0], prob.n)).copy()
    qa = psi.form.evaluate_batch(tp) if rp else np.full(w.shape[0], psi.form.c)
    qb = phi.form.evaluate_batch(tq) if phi.r else np.full(w.shape[0], phi.form.c)
    ang = np.pi / 4 * (np.asarray(qa) - np.asarray(qb))
    if not prob.d.is_trivial:
        ang = ang + prob.d.evaluate_batch(y)
    return np.exp(1j * ang)


def estimate_amplitude(u_cl, d, u_cr, x, cfg: EstimatorConfig | None = None, enumerate_all: bool = False):
    """``<x|U_cr D U_cl|0>`` by sampling the intersection of the two affine supports.

    Real and imaginary parts each get ``eps/sqrt(2)`` and ``delta/2``.
    """
    cfg = cfg or EstimatorConfig()
    prob = _problem(u_cl, d, u_cr)
    psi, phi, sol = _amplitude_setup(prob, x)
    if sol is None:
        return EstimateResult(0j, 0.0, 0, 0, extra={"intersection_dim": None})
    s = sol[1].shape[1]
    pref = 2.0 ** (s - (psi.r + phi.r) / 2)
    gphase = (psi.global_phase - phi.global_phase).to_complex()
    extra = {"intersection_dim": s, "prefactor": pref}
    if prob.d.is_trivial:
        return EstimateResult(inner_product(phi, psi), 0.0, 0, 0, extra=extra)
    if enumerate_all:
        W = ((np.arange(1 << s)[:, None] >> np.arange(s)[None, :]) & 1).astype(np.int64)
        v = _amplitude_values(prob, psi, phi, sol, W).mean()
        return EstimateResult(complex(pref * gphase * v), 0.0, 1 << s, 1, extra=extra)
    sub = cfg.scaled(cfg.epsilon / math.sqrt(2), cfg.delta / 2)
    Kg, M = sub.groups, sub.group_size
    vals = np.empty((Kg, M), complex)
    for g in range(Kg):
        rng = np.random.default_rng([cfg.seed, g])
        for st in range(0, M, cfg.batch):
            m = min(cfg.batch, M - st)
            w = rng.integers(0, 2, size=(m, s), dtype=np.int64)
            vals[g, st:st + m] = _amplitude_values(prob, psi, phi, sol, w)
    vals *= pref * gphase
    est = median_of_means(vals, Kg)
    sigma = float(np.sqrt(np.abs(vals).var() / vals.size))
    return EstimateResult(est, 0.0, Kg * M, Kg, sigma, extra)
