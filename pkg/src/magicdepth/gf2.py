"""Bit-packed GF(2) linear algebra.

Rows of a GF(2) matrix are packed little-endian into ``uint64`` words: column
``c`` lives in word ``c // 64`` at bit ``c % 64``.  Each kernel has a numba
version and a numpy version; :data:`magicdepth._accel.USE_NUMBA` picks one.
"""
from __future__ import annotations

import numpy as np

from . import _accel
from ._accel import njit

WORD = 64


def n_words(ncols: int) -> int:
    return max(1, (ncols + WORD - 1) // WORD)


def pack_rows(mat) -> np.ndarray:
    mat = np.atleast_2d(np.asarray(mat, dtype=np.uint8) & 1)
    m, n = mat.shape
    w = n_words(n)
    padded = np.zeros((m, w * WORD), dtype=np.uint8)
    padded[:, :n] = mat
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64).reshape(m, w)


def unpack_rows(words: np.ndarray, ncols: int) -> np.ndarray:
    words = np.ascontiguousarray(np.atleast_2d(words), dtype="<u8")
    m, w = words.shape
    bits = np.unpackbits(words.view(np.uint8).reshape(m, w * 8), axis=1, bitorder="little")
    return bits[:, :ncols].astype(np.uint8)


@njit(cache=True)
def _popcount64(v):
    v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
    v = (v & np.uint64(0x3333333333333333)) + ((v >> np.uint64(2)) & np.uint64(0x3333333333333333))
    v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (v * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(cache=True)
def _rref_numba(rows, ncols):
    m, w = rows.shape
    pivots = np.empty(min(m, ncols), dtype=np.int64)
    r = 0
    for col in range(ncols):
        if r == m:
            break
        word = col // 64
        bit = np.uint64(1) << np.uint64(col % 64)
        p = -1
        for i in range(r, m):
            if rows[i, word] & bit:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for k in range(w):
                tmp = rows[p, k]
                rows[p, k] = rows[r, k]
                rows[r, k] = tmp
        for i in range(m):
            if i != r and (rows[i, word] & bit):
                for k in range(w):
                    rows[i, k] ^= rows[r, k]
        pivots[r] = col
        r += 1
    return r, pivots[:r].copy()


def _rref_numpy(rows, ncols):
    m = rows.shape[0]
    pivots = []
    r = 0
    for col in range(ncols):
        if r == m:
            break
        word, bit = col // WORD, np.uint64(1) << np.uint64(col % WORD)
        hits = np.nonzero(rows[r:, word] & bit)[0]
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            rows[[r, p]] = rows[[p, r]]
        mask = (rows[:, word] & bit) != 0
        mask[r] = False
        rows[mask] ^= rows[r]
        pivots.append(col)
        r += 1
    return r, np.array(pivots, dtype=np.int64)


def rref_packed(rows: np.ndarray, ncols: int):
    """Reduced row echelon form in place; returns ``(rank, pivot_columns)``."""
    if _accel.USE_NUMBA:
        return _rref_numba(rows, ncols)
    return _rref_numpy(rows, ncols)


def rref(mat):
    """Reduced row echelon form of a dense 0/1 matrix: ``(R, pivots)``."""
    mat = np.atleast_2d(np.asarray(mat, dtype=np.uint8))
    ncols = mat.shape[1]
    rows = pack_rows(mat)
    rank, piv = rref_packed(rows, ncols)
    return unpack_rows(rows[:rank], ncols), piv


def rank(mat) -> int:
    mat = np.atleast_2d(np.asarray(mat, dtype=np.uint8))
    if mat.size == 0:
        return 0
    return int(rref_packed(pack_rows(mat), mat.shape[1])[0])


def solve_affine(a, b):
    """All solutions of ``a @ x = b`` over GF(2).

    Returns ``(x0, kernel)`` with ``kernel`` an ``ncols x k`` matrix whose columns
    span the null space, or ``None`` if the system is inconsistent.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.uint8) & 1)
    m, n = a.shape
    b = np.asarray(b, dtype=np.uint8).reshape(m) & 1
    aug = np.concatenate([a, b[:, None]], axis=1)
    red, piv = rref(aug) if m else (np.zeros((0, n + 1), np.uint8), np.zeros(0, np.int64))
    if np.any(piv == n):
        return None
    x0 = np.zeros(n, dtype=np.uint8)
    x0[piv] = red[: piv.size, n]
    free = np.setdiff1d(np.arange(n), piv)
    kernel = np.zeros((n, free.size), dtype=np.uint8)
    kernel[free, np.arange(free.size)] = 1
    if piv.size and free.size:
        kernel[np.ix_(piv, np.arange(free.size))] = red[: piv.size][:, free]
    return x0, kernel


@njit(cache=True)
def _tableau_reduce_numba(xw, zw, ph, n):
    m, w = xw.shape
    xpiv = np.empty(m, dtype=np.int64)
    zpiv = np.empty(m, dtype=np.int64)
    r = 0
    nx = 0
    for stage in range(2):
        for col in range(n):
            if r == m:
                break
            word = col // 64
            bit = np.uint64(1) << np.uint64(col % 64)
            src = xw if stage == 0 else zw
            p = -1
            for i in range(r, m):
                if src[i, word] & bit:
                    p = i
                    break
            if p < 0:
                continue
            if p != r:
                for k in range(w):
                    t = xw[p, k]
                    xw[p, k] = xw[r, k]
                    xw[r, k] = t
                    t = zw[p, k]
                    zw[p, k] = zw[r, k]
                    zw[r, k] = t
                t2 = ph[p]
                ph[p] = ph[r]
                ph[r] = t2
            for i in range(m):
                if i != r and (src[i, word] & bit):
                    s = np.uint64(0)
                    for k in range(w):
                        s += _popcount64(zw[i, k] & xw[r, k])
                    ph[i] = (ph[i] + ph[r] + 2 * np.int64(s & np.uint64(1))) % 4
                    for k in range(w):
                        xw[i, k] ^= xw[r, k]
                        zw[i, k] ^= zw[r, k]
            if stage == 0:
                xpiv[r] = col
            else:
                zpiv[r - nx] = col
            r += 1
        if stage == 0:
            nx = r
    return nx, r, xpiv[:nx].copy(), zpiv[: r - nx].copy()


def _tableau_reduce_numpy(xw, zw, ph, n):
    m = xw.shape[0]
    r = 0
    nx = 0
    xpiv, zpiv = [], []
    for stage, src in ((0, xw), (1, zw)):
        for col in range(n):
            if r == m:
                break
            word, bit = col // WORD, np.uint64(1) << np.uint64(col % WORD)
            hits = np.nonzero(src[r:, word] & bit)[0]
            if hits.size == 0:
                continue
            p = r + int(hits[0])
            if p != r:
                xw[[r, p]] = xw[[p, r]]
                zw[[r, p]] = zw[[p, r]]
                ph[[r, p]] = ph[[p, r]]
            mask = (src[:, word] & bit) != 0
            mask[r] = False
            if mask.any():
                par = np.bitwise_count(zw[mask] & xw[r]).sum(axis=1) & 1
                ph[mask] = (ph[mask] + ph[r] + 2 * par.astype(np.int64)) % 4
                xw[mask] ^= xw[r]
                zw[mask] ^= zw[r]
            (xpiv if stage == 0 else zpiv).append(col)
            r += 1
        if stage == 0:
            nx = r
    return nx, r, np.array(xpiv, np.int64), np.array(zpiv, np.int64)


def tableau_reduce(xw, zw, ph, n):
    """Phase-exact row reduction of a Pauli generator list, in place.

    Rows are ``i**ph * X^x Z^z``; row ``i`` is replaced by ``row_i * row_p`` when
    eliminating.  X-pivots come first, then Z-pivots among the X-free rows.
    Returns ``(n_xrows, rank, x_pivots, z_pivots)``.
    """
    if _accel.USE_NUMBA:
        return _tableau_reduce_numba(xw, zw, ph, n)
    return _tableau_reduce_numpy(xw, zw, ph, n)
