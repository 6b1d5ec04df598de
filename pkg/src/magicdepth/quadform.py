"""Quadratic forms over GF(2) with values in Z_8, and their exponential sums.

A form on ``r`` binary variables is ``q(t) = c + L.t + 4 * sum_{i<j} Q_ij t_i t_j
(mod 8)`` with ``Q`` a symmetric 0/1 matrix with zero diagonal.  All forms that
describe stabilizer states keep ``L`` even; the constant may be odd.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from ._accel import njit


@dataclass(frozen=True)
class GaussSum:
    """``0`` if ``zero`` else ``2**(half_exp/2) * exp(i*pi*octant/4)``."""

    zero: bool
    half_exp: int = 0
    octant: int = 0

    def __complex__(self):
        if self.zero:
            return 0j
        return complex((2.0 ** (self.half_exp / 2)) * np.exp(1j * np.pi * (self.octant % 8) / 4))

    def scaled(self, half_exp: int, octant: int = 0) -> "GaussSum":
        if self.zero:
            return self
        return GaussSum(False, self.half_exp + half_exp, (self.octant + octant) % 8)

    def conj(self) -> "GaussSum":
        return self if self.zero else GaussSum(False, self.half_exp, (-self.octant) % 8)

    def __mul__(self, other: "GaussSum") -> "GaussSum":
        if self.zero or other.zero:
            return GaussSum(True)
        return GaussSum(False, self.half_exp + other.half_exp, (self.octant + other.octant) % 8)


def _flip_pairs(Q, idx):
    if idx.size > 1:
        Q[np.ix_(idx, idx)] ^= 1
        Q[idx, idx] = 0


class Z8Form:
    """Mutable working representation of a Z_8-valued quadratic form."""

    def __init__(self, r: int = 0, c: int = 0, L=None, Q=None):
        self.c = int(c) % 8
        self.L = np.zeros(r, np.int64) if L is None else np.asarray(L, np.int64).copy() % 8
        self.Q = np.zeros((r, r), np.uint8) if Q is None else np.asarray(Q, np.uint8).copy() & 1
        if self.Q.shape != (self.L.size, self.L.size):
            raise ValueError("Q must be r x r")
        if self.Q.size and (np.any(self.Q != self.Q.T) or np.any(np.diag(self.Q))):
            raise ValueError("Q must be symmetric with zero diagonal")

    @property
    def r(self) -> int:
        return int(self.L.size)

    def copy(self) -> "Z8Form":
        return Z8Form(self.r, self.c, self.L, self.Q)

    def evaluate(self, t) -> int:
        t = np.asarray(t, np.int64)
        quad = int(t @ np.triu(self.Q.astype(np.int64), 1) @ t)
        return (self.c + int(self.L @ t) + 4 * quad) % 8

    def evaluate_batch(self, T) -> np.ndarray:
        T = np.asarray(T, np.float64)
        if self.r == 0:
            return np.full(T.shape[0], self.c, np.int64)
        upper = np.triu(self.Q.astype(np.float64), 1)
        quad = np.einsum("ij,ij->i", T @ upper, T).astype(np.int64)
        lin = (T @ self.L.astype(np.float64)).astype(np.int64)
        return (self.c + lin + 4 * quad) % 8

    def add_const(self, k: int):
        self.c = (self.c + int(k)) % 8

    def add_parity(self, coeff: int, vec, const: int = 0):
        """Add ``coeff * (const XOR vec.t)`` (``coeff`` even unless ``|vec| <= 1``)."""
        idx = np.flatnonzero(np.asarray(vec, np.uint8) & 1)
        coeff = int(coeff) % 8
        if const & 1:
            self.c = (self.c + coeff) % 8
            coeff = (-coeff) % 8
        if coeff == 0 or idx.size == 0:
            return
        if coeff % 2 and idx.size > 1:
            raise ValueError("odd multiple of a parity is not a Z_8 quadratic form")
        self.L[idx] = (self.L[idx] + coeff) % 8
        if coeff % 4 == 2:
            _flip_pairs(self.Q, idx)

    def add_product(self, u, u0: int, v, v0: int):
        """Add ``4 * (u0 XOR u.t) * (v0 XOR v.t)``."""
        u = np.asarray(u, np.uint8) & 1
        v = np.asarray(v, np.uint8) & 1
        u0, v0 = int(u0) & 1, int(v0) & 1
        if u0 & v0:
            self.c = (self.c + 4) % 8
        if u0:
            self.L = (self.L + 4 * v.astype(np.int64)) % 8
        if v0:
            self.L = (self.L + 4 * u.astype(np.int64)) % 8
        iu, iv = np.flatnonzero(u), np.flatnonzero(v)
        if iu.size == 0 or iv.size == 0:
            return
        self.L = (self.L + 4 * (u & v).astype(np.int64)) % 8
        if iv.size < iu.size:
            iu, iv, u, v = iv, iu, v, u
        # iu is the sparser side: row/column updates cost O(|iu| * r)
        for a in iu:
            self.Q[a, :] ^= v
            self.Q[:, a] ^= v
        self.Q[np.arange(self.r), np.arange(self.r)] = 0

    def change_variable(self, m: int, vec, const: int = 0):
        """Substitute ``t_m := const XOR vec.t`` (``vec`` may contain ``m``)."""
        vec = np.asarray(vec, np.uint8) & 1
        lm = int(self.L[m])
        row = self.Q[m].copy()
        self.L[m] = 0
        self.Q[m, :] = 0
        self.Q[:, m] = 0
        self.add_parity(lm, vec, const)
        if row.any():
            self.add_product(row, 0, vec, const)

    def drop_variable(self, m: int):
        keep = np.arange(self.r) != m
        self.L = self.L[keep]
        self.Q = self.Q[np.ix_(keep, keep)]

    def add_variable(self) -> int:
        self.L = np.append(self.L, 0)
        r = self.r
        Q = np.zeros((r, r), np.uint8)
        Q[: r - 1, : r - 1] = self.Q
        self.Q = Q
        return r - 1

    def compose(self, T, t0) -> "Z8Form":
        """The form ``w -> q(T w XOR t0)`` for an ``r x k`` binary matrix ``T``."""
        T = np.asarray(T, np.uint8) & 1
        t0 = np.asarray(t0, np.uint8).reshape(-1) & 1
        r, k = T.shape
        if r != self.r:
            raise ValueError("dimension mismatch in compose")
        if r == 0:
            return Z8Form(k, self.c)
        Tf = T.astype(np.float64)
        L = self.L % 8
        odd_rows = (L % 2 == 1) & (T.sum(axis=1) > 1)
        if odd_rows.any():
            raise ValueError("odd linear coefficient composed with a multi-variable parity")
        sign = np.where(t0 == 1, -1, 1)
        c = self.c + int(L @ t0.astype(np.int64))
        lin = ((sign * L).astype(np.float64) @ Tf).astype(np.int64)
        odd = (L % 4 == 2).astype(np.float64)
        pairs = (Tf.T @ (odd[:, None] * Tf)).astype(np.int64) & 1

        Qf = self.Q.astype(np.float64)
        upper = np.triu(Qf, 1)
        c += 4 * (int(t0.astype(np.float64) @ upper @ t0.astype(np.float64)) & 1)
        M = (Tf.T @ upper @ Tf).astype(np.int64) & 1
        lin = lin + 4 * np.diag(M) + 4 * ((Tf.T @ (Qf @ t0.astype(np.float64))).astype(np.int64) & 1)
        quad = (pairs ^ M ^ M.T) & 1
        np.fill_diagonal(quad, 0)
        return Z8Form(k, c, lin % 8, quad.astype(np.uint8))

    def gauss_sum(self) -> GaussSum:
        """``sum_t exp(i*pi/4 * q(t))`` exactly, in ``O(r^3)``."""
        if _accel.USE_NUMBA:
            zero, half, octant, bad = _gauss_numba(self.c, self.L.copy(), self.Q.copy())
        else:
            zero, half, octant, bad = _gauss_numpy(self.c, self.L.copy(), self.Q.copy())
        if bad:
            raise ValueError("form has an odd linear coefficient; sum is not a power of sqrt(2)")
        return GaussSum(bool(zero), int(half), int(octant) % 8)


@njit(cache=True)
def _gauss_numba(c, L, Q):
    r = L.size
    active = np.ones(r, dtype=np.bool_)
    half = 0
    octv = c
    vec = np.empty(r, dtype=np.int64)
    for i in range(r):
        if not active[i]:
            continue
        active[i] = False
        li = L[i] % 8
        if li % 2 == 1:
            return False, 0, 0, True
        m = -1
        for j in range(r):
            if active[j] and Q[i, j]:
                m = j
                break
        if m < 0:
            if li == 0:
                half += 2
            elif li == 4:
                return True, 0, 0, False
            elif li == 2:
                half += 1
                octv += 1
            else:
                half += 1
                octv -= 1
        elif li % 4 == 0:
            half += 2
            c0 = li // 4
            nv = 0
            for k in range(r):
                if active[k] and k != m and Q[i, k]:
                    vec[nv] = k
                    nv += 1
            lm = L[m] % 8
            if c0:
                octv += lm
                lm = (8 - lm) % 8
            for a in range(nv):
                L[vec[a]] += lm
            if lm % 4 == 2:
                for a in range(nv):
                    for b in range(a + 1, nv):
                        Q[vec[a], vec[b]] ^= 1
                        Q[vec[b], vec[a]] ^= 1
            active[m] = False
            for j in range(r):
                if active[j] and Q[m, j]:
                    if c0:
                        L[j] += 4
                    for a in range(nv):
                        k = vec[a]
                        if k == j:
                            L[j] += 4
                        else:
                            Q[j, k] ^= 1
                            Q[k, j] ^= 1
        else:
            s = 1 if li == 2 else -1
            half += 1
            octv += s
            nv = 0
            for k in range(r):
                if active[k] and Q[i, k]:
                    vec[nv] = k
                    nv += 1
            for a in range(nv):
                L[vec[a]] -= 2 * s
                for b in range(a + 1, nv):
                    Q[vec[a], vec[b]] ^= 1
                    Q[vec[b], vec[a]] ^= 1
    return False, half, octv % 8, False


def _gauss_numpy(c, L, Q):
    r = L.size
    active = np.ones(r, dtype=bool)
    half = 0
    octv = int(c)
    for i in range(r):
        if not active[i]:
            continue
        active[i] = False
        li = int(L[i]) % 8
        if li % 2:
            return False, 0, 0, True
        nbrs = np.flatnonzero(active & (Q[i] == 1))
        if nbrs.size == 0:
            if li == 0:
                half += 2
            elif li == 4:
                return True, 0, 0, False
            else:
                half += 1
                octv += 1 if li == 2 else -1
        elif li % 4 == 0:
            half += 2
            m = int(nbrs[0])
            c0 = li // 4
            vec = nbrs[1:]
            lm = int(L[m]) % 8
            if c0:
                octv += lm
                lm = (-lm) % 8
            L[vec] += lm
            if lm % 4 == 2:
                _flip_pairs(Q, vec)
            active[m] = False
            rows = np.flatnonzero(active & (Q[m] == 1))
            if c0:
                L[rows] += 4
            if rows.size and vec.size:
                block = np.zeros((r, r), np.uint8)
                block[np.ix_(rows, vec)] = 1
                diag = np.diag(block).copy()
                L += 4 * diag.astype(np.int64)
                sym = block ^ block.T
                np.fill_diagonal(sym, 0)
                Q ^= sym
        else:
            s = 1 if li == 2 else -1
            half += 1
            octv += s
            L[nbrs] -= 2 * s
            _flip_pairs(Q, nbrs)
    return False, half, octv % 8, False


def quadratic_gauss_sum(q_const, q_lin, q_quad, r=None) -> GaussSum:
    """Exact ``sum_{t in GF(2)^r} exp(i*pi/4 * q(t))``.

    ``q_quad`` is a symmetric matrix with entries in ``{0, 4}``; each unordered
    pair ``i < j`` contributes ``q_quad[i, j] * t_i * t_j`` once, and diagonal
    entries act as linear terms.
    """
    q_lin = np.asarray(q_lin, np.int64).reshape(-1)
    r = q_lin.size if r is None else int(r)
    quad = np.asarray(q_quad, np.int64).reshape(r, r) % 8 if r else np.zeros((0, 0), np.int64)
    if np.any((quad != 0) & (quad != 4)) or np.any(quad != quad.T):
        raise ValueError("q_quad must be symmetric with entries in {0, 4}")
    L = (q_lin + np.diag(quad)) % 8
    Q = (quad // 4).astype(np.uint8)
    np.fill_diagonal(Q, 0)
    return Z8Form(r, q_const, L, Q).gauss_sum()


def gauss_sum_bruteforce(form: Z8Form) -> complex:
    r = form.r
    if r == 0:
        return complex(np.exp(1j * np.pi * form.c / 4))
    T = ((np.arange(1 << r)[:, None] >> np.arange(r)[None, :]) & 1).astype(np.uint8)
    vals = form.evaluate_batch(T)
    return complex(np.exp(1j * np.pi * vals / 4).sum())
