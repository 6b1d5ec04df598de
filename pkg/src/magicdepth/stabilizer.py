"""Stabilizer states: tableaux, canonical forms, affine (computational-basis)
forms, and exact inner products.

Phases follow :class:`~magicdepth.core.PauliString`: a row is
``i**k X^x Z^z`` with the X factor to the left of the Z factor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import gf2
from .core import DyadicPhase, PauliString, bits_to_index
from .quadform import GaussSum, Z8Form

CLIFFORD_GATES = {
    "H": 1, "S": 1, "SDG": 1, "X": 1, "Y": 1, "Z": 1, "I": 1,
    "CNOT": 2, "CX": 2, "CZ": 2, "SWAP": 2,
}
_ALIASES = {"S†": "SDG", "SDAG": "SDG", "CX": "CNOT", "ID": "I"}


def gate_name(name: str) -> str:
    key = str(name).upper() if name != "S†" else name
    key = _ALIASES.get(key, key)
    if key not in CLIFFORD_GATES:
        raise ValueError(f"unknown Clifford gate {name!r}")
    return key


def _check_qubits(name, qubits, n):
    qubits = tuple(int(q) for q in qubits)
    if len(qubits) != CLIFFORD_GATES[name]:
        raise ValueError(f"{name} acts on {CLIFFORD_GATES[name]} qubit(s), got {qubits}")
    for q in qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit index {q} out of range for n={n}")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"repeated qubit in {name}{qubits}")
    return qubits


def _conjugate_rows(x, z, k, name, qubits):
    """In-place ``P -> g P g^dagger`` on row arrays (columns are qubits)."""
    if name == "I":
        return
    if name == "H":
        (a,) = qubits
        xa, za = x[:, a].copy(), z[:, a].copy()
        k += 2 * (xa & za)
        x[:, a], z[:, a] = za, xa
    elif name == "S":
        (a,) = qubits
        k += x[:, a]
        z[:, a] ^= x[:, a]
    elif name == "SDG":
        (a,) = qubits
        k += 3 * x[:, a].astype(np.int64)
        z[:, a] ^= x[:, a]
    elif name == "X":
        k += 2 * z[:, qubits[0]]
    elif name == "Z":
        k += 2 * x[:, qubits[0]]
    elif name == "Y":
        a = qubits[0]
        k += 2 * (x[:, a] ^ z[:, a])
    elif name == "CNOT":
        c, t = qubits
        x[:, t] ^= x[:, c]
        z[:, c] ^= z[:, t]
    elif name == "CZ":
        c, t = qubits
        k += 2 * (x[:, c] & x[:, t])
        z[:, c] ^= x[:, t]
        z[:, t] ^= x[:, c]
    elif name == "SWAP":
        a, b = qubits
        x[:, [a, b]] = x[:, [b, a]]
        z[:, [a, b]] = z[:, [b, a]]
    k %= 4


INVERSE = {"H": "H", "S": "SDG", "SDG": "S", "X": "X", "Y": "Y", "Z": "Z", "I": "I",
           "CNOT": "CNOT", "CZ": "CZ", "SWAP": "SWAP"}


def invert_word(word):
    return [(INVERSE[gate_name(g)], tuple(q)) for g, q in reversed(list(word))]


def conjugate_pauli(p: PauliString, word, dagger: bool = False) -> PauliString:
    """``U P U^dagger`` for the Clifford word ``U`` (first gate applied first).

    With ``dagger`` the result is ``U^dagger P U``.
    """
    x, z = p.x.copy()[None, :], p.z.copy()[None, :]
    k = np.array([p.i_power], np.int64)
    seq = invert_word(word) if dagger else [(gate_name(g), tuple(q)) for g, q in word]
    for g, q in seq:
        _conjugate_rows(x, z, k, g, _check_qubits(g, q, p.n))
    return PauliString(x[0], z[0], int(k[0]))


def _rows_to_paulis(x, z, k):
    return [PauliString(x[i], z[i], int(k[i])) for i in range(x.shape[0])]


def _paulis_to_rows(paulis, n=None):
    paulis = list(paulis)
    if n is None:
        if not paulis:
            raise ValueError("cannot infer qubit count from an empty generator list")
        n = paulis[0].n
    if any(p.n != n for p in paulis):
        raise ValueError("generators have inconsistent lengths")
    m = len(paulis)
    x = np.zeros((m, n), np.uint8)
    z = np.zeros((m, n), np.uint8)
    k = np.zeros(m, np.int64)
    for i, p in enumerate(paulis):
        x[i], z[i], k[i] = p.x, p.z, p.i_power
    return x, z, k


def _grid(x, z, k):
    lines = []
    for i in range(x.shape[0]):
        lines.append(str(PauliString(x[i], z[i], int(k[i]))).rjust(x.shape[1] + 2))
    return lines


class StabilizerTableau:
    """Generators (and optionally destabilizers) of an ``n``-qubit stabilizer state."""

    def __init__(self, x, z, k, dx=None, dz=None, dk=None):
        self.x = np.array(x, np.uint8) & 1
        self.z = np.array(z, np.uint8) & 1
        self.k = np.array(k, np.int64).reshape(-1) % 4
        self.n = self.x.shape[1]
        if self.x.shape != (self.n, self.n) or self.z.shape != self.x.shape or self.k.size != self.n:
            raise ValueError("a pure-state tableau needs n generators on n qubits")
        self.has_destabilizers = dx is not None
        if self.has_destabilizers:
            self.dx = np.array(dx, np.uint8) & 1
            self.dz = np.array(dz, np.uint8) & 1
            self.dk = np.array(dk, np.int64).reshape(-1) % 4

    @classmethod
    def zero_state(cls, n: int) -> "StabilizerTableau":
        eye = np.eye(n, dtype=np.uint8)
        zero = np.zeros((n, n), np.uint8)
        return cls(zero, eye, np.zeros(n), eye, zero, np.zeros(n))

    @classmethod
    def from_paulis(cls, generators: Iterable, destabilizers: Iterable | None = None) -> "StabilizerTableau":
        gens = [PauliString.from_str(g) if isinstance(g, str) else g for g in generators]
        x, z, k = _paulis_to_rows(gens)
        if destabilizers is None:
            return cls(x, z, k)
        ds = [PauliString.from_str(g) if isinstance(g, str) else g for g in destabilizers]
        dx, dz, dk = _paulis_to_rows(ds, x.shape[1])
        return cls(x, z, k, dx, dz, dk)

    @classmethod
    def from_circuit(cls, n: int, word) -> "StabilizerTableau":
        tab = cls.zero_state(n)
        for g, q in word:
            tab.apply_inplace(g, q)
        return tab

    def copy(self) -> "StabilizerTableau":
        if self.has_destabilizers:
            return StabilizerTableau(self.x, self.z, self.k, self.dx, self.dz, self.dk)
        return StabilizerTableau(self.x, self.z, self.k)

    @property
    def generators(self) -> list:
        return _rows_to_paulis(self.x, self.z, self.k)

    @property
    def destabilizers(self):
        if not self.has_destabilizers:
            return None
        return _rows_to_paulis(self.dx, self.dz, self.dk)

    def apply_inplace(self, gate: str, qubits: Sequence[int]):
        name = gate_name(gate)
        qubits = _check_qubits(name, qubits, self.n)
        _conjugate_rows(self.x, self.z, self.k, name, qubits)
        if self.has_destabilizers:
            _conjugate_rows(self.dx, self.dz, self.dk, name, qubits)
        return self

    def validate(self):
        """Raise ``ValueError`` unless the generators define a pure state."""
        if np.any(self.k % 2 != np.sum(self.x.astype(np.int64) & self.z, axis=1) % 2):
            raise ValueError("non-Hermitian generator")
        xf, zf = self.x.astype(np.float64), self.z.astype(np.float64)
        sym = (xf @ zf.T + zf @ xf.T).astype(np.int64) & 1
        if sym.any():
            raise ValueError("generators do not commute")
        if gf2.rank(np.concatenate([self.x, self.z], axis=1)) != self.n:
            raise ValueError("generators are dependent")

    def stabilizes(self, vec, atol: float = 1e-9) -> bool:
        vec = np.asarray(vec, complex)
        for p in self.generators:
            if not np.allclose(_apply_pauli_dense(p, vec), vec, atol=atol):
                return False
        return True

    def dump(self) -> str:
        lines = _grid(self.x, self.z, self.k)
        if self.has_destabilizers:
            lines = _grid(self.dx, self.dz, self.dk) + ["-" * (self.n + 2)] + lines
        return "\n".join(lines)

    def __repr__(self):
        return f"StabilizerTableau(n={self.n})"


def _apply_pauli_dense(p: PauliString, vec):
    n = p.n
    idx = np.arange(1 << n)
    xmask = bits_to_index(p.x)
    weights = 1 << (n - 1 - np.arange(n))
    zmask = int(np.dot(p.z.astype(np.int64), weights))
    parity = np.bitwise_count((idx & zmask).astype(np.uint64)) & 1
    out = np.zeros_like(vec)
    # P|j> = i^k X^x Z^z |j> = i^k (-1)^{z.j} |j ^ x>
    out[idx ^ xmask] = vec * (1j ** p.i_power) * (1 - 2 * parity.astype(np.float64))
    return out


def apply_clifford_gate(tab: StabilizerTableau, gate: str, qubits: Sequence[int]) -> StabilizerTableau:
    return tab.copy().apply_inplace(gate, qubits)


@dataclass
class CanonicalTableau:
    """X-block rows (leading X/Y columns strictly increasing) over Z-block rows."""

    n: int
    xx: np.ndarray
    xz: np.ndarray
    xk: np.ndarray
    zz: np.ndarray
    zk: np.ndarray
    x_pivots: np.ndarray
    z_pivots: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))

    @property
    def s_x(self) -> list:
        return _rows_to_paulis(self.xx, self.xz, self.xk)

    @property
    def s_z(self) -> list:
        return _rows_to_paulis(np.zeros_like(self.zz), self.zz, self.zk)

    @property
    def pivots(self) -> np.ndarray:
        return self.x_pivots

    def dump(self) -> str:
        lines = _grid(self.xx, self.xz, self.xk)
        lines.append("-" * (self.n + 2))
        lines += _grid(np.zeros_like(self.zz), self.zz, self.zk)
        return "\n".join(lines)


def canonicalize(tab: StabilizerTableau) -> CanonicalTableau:
    tab.validate()
    n = tab.n
    xw, zw = gf2.pack_rows(tab.x), gf2.pack_rows(tab.z)
    ph = tab.k.copy()
    nx, rk, xpiv, zpiv = gf2.tableau_reduce(xw, zw, ph, n)
    if rk != n:
        raise ValueError("generators are dependent")
    x = gf2.unpack_rows(xw, n)
    z = gf2.unpack_rows(zw, n)
    return CanonicalTableau(
        n, x[:nx], z[:nx], ph[:nx] % 4, z[nx:], ph[nx:] % 4,
        np.asarray(xpiv, np.int64), np.asarray(zpiv, np.int64),
    )


@dataclass
class ZBlockAffine:
    """``{A t + b}``: the bitstrings with +1 eigenvalue under every Z-block row."""

    a_matrix: np.ndarray
    b_offset: np.ndarray
    r: int
    pivots: np.ndarray

    @property
    def n(self) -> int:
        return int(self.b_offset.size)

    def contains(self, x) -> bool:
        d = (np.asarray(x, np.uint8) ^ self.b_offset)
        return gf2.rank(np.concatenate([self.a_matrix, d[:, None]], axis=1)) == self.r

    def points(self, t) -> np.ndarray:
        """Bitstrings for a batch (rows) of parameter vectors."""
        t = np.atleast_2d(np.asarray(t, np.float64))
        if self.r == 0:
            return np.broadcast_to(self.b_offset, (t.shape[0], self.n)).copy()
        return ((t @ self.a_matrix.T.astype(np.float64)).astype(np.int64) & 1).astype(np.uint8) ^ self.b_offset


def _solve_signs(zrows, zk, n):
    if zrows.shape[0] == 0:
        return np.zeros(n, np.uint8), np.eye(n, dtype=np.uint8)
    if np.any(zk % 2):
        raise ValueError("non-Hermitian Z-type row")
    sol = gf2.solve_affine(zrows, (zk // 2) % 2)
    if sol is None:
        raise ValueError("inconsistent signs: the group contains -I")
    return sol


def zblock_to_affine(s_z: Sequence[PauliString], n: int | None = None) -> ZBlockAffine:
    s_z = list(s_z)
    if n is None:
        if not s_z:
            raise ValueError("n is required for an empty Z block")
        n = s_z[0].n
    x, z, k = _paulis_to_rows(s_z, n) if s_z else (np.zeros((0, n), np.uint8),) * 2 + (np.zeros(0, np.int64),)
    if x.any():
        raise ValueError("Z-block rows must have no X part")
    if s_z and gf2.rank(z) != len(s_z):
        raise ValueError("Z-block rows are dependent")
    b, A = _solve_signs(z, k, n)
    red, piv = gf2.rref(A.T) if A.shape[1] else (np.zeros((0, n), np.uint8), np.zeros(0, np.int64))
    A = red.T.copy()
    b = b.copy()
    for j, p in enumerate(piv):
        if b[p]:
            b ^= A[:, j]
    return ZBlockAffine(A, b, A.shape[1], np.asarray(piv, np.int64))


class AffineForm:
    """``phase * 2^{-r/2} sum_t exp(i*pi/4 q(t)) |B t + offset>``.

    ``pivots[j]`` is a row where column ``j`` of the basis is the only nonzero
    entry; every update keeps that invariant.
    """

    def __init__(self, basis, offset, form: Z8Form, pivots, global_phase: DyadicPhase = DyadicPhase()):
        self.basis = np.array(basis, np.uint8).reshape(len(offset), -1) & 1
        self.offset = np.array(offset, np.uint8).reshape(-1) & 1
        self.form = form
        self.pivots = np.array(pivots, np.int64).reshape(-1)
        self.global_phase = global_phase
        if self.form.r != self.basis.shape[1] or self.pivots.size != self.form.r:
            raise ValueError("inconsistent affine form dimensions")

    @classmethod
    def basis_state(cls, bits) -> "AffineForm":
        bits = np.asarray(bits, np.uint8)
        return cls(np.zeros((bits.size, 0), np.uint8), bits, Z8Form(0), np.zeros(0, np.int64))

    @classmethod
    def zero_state(cls, n: int) -> "AffineForm":
        return cls.basis_state(np.zeros(n, np.uint8))

    @property
    def n(self) -> int:
        return int(self.offset.size)

    @property
    def r(self) -> int:
        return int(self.basis.shape[1])

    @property
    def q_const(self) -> int:
        return self.form.c

    @property
    def q_lin(self) -> np.ndarray:
        return self.form.L.copy()

    @property
    def q_quad(self) -> np.ndarray:
        return 4 * self.form.Q.astype(np.int64)

    @property
    def global_scale(self) -> float:
        return 2.0 ** (-self.r / 2)

    def copy(self) -> "AffineForm":
        return AffineForm(self.basis, self.offset, self.form.copy(), self.pivots, self.global_phase)

    def total_phase(self) -> DyadicPhase:
        return self.global_phase + DyadicPhase.octants(self.form.c)

    def check(self):
        B = self.basis
        for j, p in enumerate(self.pivots):
            row = np.zeros(self.r, np.uint8)
            row[j] = 1
            if not np.array_equal(B[p], row):
                raise AssertionError(f"pivot invariant broken at column {j}")

    def support(self) -> np.ndarray:
        r = self.r
        T = ((np.arange(1 << r)[:, None] >> np.arange(r)[None, :]) & 1).astype(np.uint8)
        return T, (((T.astype(np.int64) @ self.basis.T.astype(np.int64)) & 1).astype(np.uint8) ^ self.offset)

    def to_statevector(self) -> np.ndarray:
        if self.n > 24 or self.r > 24:
            raise ValueError("dense expansion refused beyond 24 qubits")
        T, X = self.support()
        vals = self.form.evaluate_batch(T)
        amps = self.global_scale * self.global_phase.to_complex() * np.exp(1j * np.pi * vals / 4)
        weights = 1 << (self.n - 1 - np.arange(self.n))
        idx = X.astype(np.int64) @ weights if self.n else np.zeros(len(T), np.int64)
        out = np.zeros(1 << self.n, complex)
        np.add.at(out, idx, amps)
        return out

    def amplitude(self, bits) -> complex:
        bits = np.asarray(bits, np.uint8)
        t = self.coordinates(bits)
        if t is None:
            return 0j
        return self.global_scale * self.global_phase.to_complex() * np.exp(1j * np.pi * self.form.evaluate(t) / 4)

    def coordinates(self, bits):
        """``t`` with ``B t + offset == bits``, or ``None``."""
        bits = np.asarray(bits, np.uint8).reshape(-1)
        t = (bits ^ self.offset)[self.pivots] if self.r else np.zeros(0, np.uint8)
        img = ((self.basis.astype(np.int64) @ t.astype(np.int64)) & 1).astype(np.uint8) ^ self.offset
        return t if np.array_equal(img, bits) else None

    # --- exact gate updates -------------------------------------------------

    def _col_add(self, p: int, cols):
        """``col_k += col_p`` for ``k`` in ``cols`` (``t_p = u_p + sum_K u_k``)."""
        cols = [int(k) for k in cols if k != p]
        if not cols:
            return
        self.basis[:, cols] ^= self.basis[:, [p]]
        vec = np.zeros(self.r, np.uint8)
        vec[p] = 1
        vec[cols] = 1
        self.form.change_variable(p, vec, 0)

    def _repivot(self, m: int, exclude: int = -1):
        """Give column ``m`` a clean pivot row."""
        rows = np.flatnonzero(self.basis[:, m])
        rows = rows[rows != exclude] if rows.size > 1 else rows
        i = int(rows[0])
        self._col_add(m, np.flatnonzero(self.basis[i]))
        self.pivots[m] = i

    def _remove_var(self, p: int):
        keep = np.arange(self.r) != p
        self.basis = self.basis[:, keep]
        self.pivots = self.pivots[keep]
        self.form.drop_variable(p)

    def _new_var(self, row: int) -> int:
        j = self.form.add_variable()
        col = np.zeros((self.n, 1), np.uint8)
        col[row] = 1
        self.basis = np.concatenate([self.basis, col], axis=1)
        self.pivots = np.append(self.pivots, row)
        return j

    def apply(self, gate: str, qubits: Sequence[int]) -> "AffineForm":
        name = gate_name(gate)
        q = _check_qubits(name, qubits, self.n)
        B, b, f = self.basis, self.offset, self.form
        if name == "I":
            pass
        elif name == "X":
            b[q[0]] ^= 1
        elif name == "Z":
            f.add_parity(4, B[q[0]], b[q[0]])
        elif name == "S":
            f.add_parity(2, B[q[0]], b[q[0]])
        elif name == "SDG":
            f.add_parity(6, B[q[0]], b[q[0]])
        elif name == "Y":
            f.add_parity(4, B[q[0]], b[q[0]])
            b[q[0]] ^= 1
            f.add_const(2)
        elif name == "CZ":
            f.add_product(B[q[0]], b[q[0]], B[q[1]], b[q[1]])
        elif name == "CNOT":
            self._cnot(*q)
        elif name == "SWAP":
            a, c = q
            self._cnot(a, c)
            self._cnot(c, a)
            self._cnot(a, c)
        elif name == "H":
            self._hadamard(q[0])
        return self

    def _cnot(self, c: int, t: int):
        B = self.basis
        if not B[c].any():
            self.offset[t] ^= self.offset[c]
            return
        owner = np.flatnonzero(self.pivots == t)
        B[t] ^= B[c]
        self.offset[t] ^= self.offset[c]
        if owner.size:
            m = int(owner[0])
            if B[t, m]:
                self._col_add(m, np.flatnonzero(B[t]))
            else:
                self._repivot(m)

    def _hadamard(self, j: int):
        B, f = self.basis, self.form
        bj = int(self.offset[j])
        ell = np.flatnonzero(B[j])
        if ell.size == 0:
            y = self._new_var(j)
            f.L[y] = 4 * bj
            self.offset[j] = 0
            return
        owner = np.flatnonzero(self.pivots == j)
        p = int(owner[0]) if owner.size else int(ell[0])
        self._col_add(p, ell)
        B = self.basis
        self.pivots[p] = j
        col = B[:, p].copy()
        col[j] = 0
        if not col.any():
            lp = int(f.L[p]) % 8
            row = f.Q[p].copy()
            f.L[p] = 0
            f.Q[p, :] = 0
            f.Q[:, p] = 0
            if lp % 4 == 0:
                # the sum over t_p pins qubit j to an affine function
                f.add_parity(4 * bj, row, lp // 4)
                B[j] = row
                self.offset[j] = lp // 4
                self._remove_var(p)
            else:
                s = 1 if lp == 2 else -1
                f.add_const(s)
                vec = row.copy()
                vec[p] = 1
                f.add_parity(-2 * s, vec, 0)
                f.L[p] = (f.L[p] + 4 * bj) % 8
                self.offset[j] = 0
            return
        y = self._new_var(j)
        B = self.basis
        B[j, p] = 0
        f.L[y] = 4 * bj
        f.Q[p, y] = f.Q[y, p] = 1
        self.offset[j] = 0
        self._repivot(p)

    def apply_word(self, word) -> "AffineForm":
        for g, q in word:
            self.apply(g, q)
        return self

    def __repr__(self):
        return f"AffineForm(n={self.n}, r={self.r})"


def to_affine_form(tab: StabilizerTableau) -> AffineForm:
    """Computational-basis form; the lexicographically smallest string in the
    support gets amplitude phase exactly 0."""
    can = canonicalize(tab)
    n = tab.n
    B = can.xx.T.copy()
    r = B.shape[1]
    b, _ = _solve_signs(can.zz, can.zk, n)
    b = b.copy()
    for j, p in enumerate(can.x_pivots):
        if b[p]:
            b ^= B[:, j]
    zf = can.xz.astype(np.float64)
    zb = (zf @ b.astype(np.float64)).astype(np.int64) & 1 if r else np.zeros(0, np.int64)
    L = (2 * can.xk + 4 * zb) % 8
    Q = ((zf @ can.xx.T.astype(np.float64)).astype(np.int64) & 1).astype(np.uint8) if r else np.zeros((0, 0), np.uint8)
    np.fill_diagonal(Q, 0)
    return AffineForm(B, b, Z8Form(r, 0, L, Q), can.x_pivots.copy())


def apply_local_clifford_to_affine(a: AffineForm, word, phase: DyadicPhase = DyadicPhase()) -> AffineForm:
    out = a.copy().apply_word(word)
    out.global_phase = out.global_phase + phase
    return out


def inner_product_exact(a: AffineForm, b: AffineForm):
    """``<a|b>`` as ``(GaussSum scaled by 2^{-(r_a+r_b)/2}, DyadicPhase)``."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    ra, rb = a.r, b.r
    M = np.concatenate([a.basis, b.basis], axis=1)
    rhs = a.offset ^ b.offset
    if M.shape[1] == 0:
        sol = (np.zeros(0, np.uint8), np.zeros((0, 0), np.uint8)) if not rhs.any() else None
    else:
        sol = gf2.solve_affine(M, rhs)
    if sol is None:
        return GaussSum(True), DyadicPhase()
    z0, K = sol
    fa = a.form.compose(K[:ra], z0[:ra])
    fb = b.form.compose(K[ra:], z0[ra:])
    comb = Z8Form(fb.r, fb.c - fa.c, (fb.L - fa.L) % 8, fb.Q ^ fa.Q)
    g = comb.gauss_sum().scaled(-(ra + rb))
    return g, b.global_phase - a.global_phase


def inner_product(a: AffineForm, b: AffineForm) -> complex:
    g, ph = inner_product_exact(a, b)
    if g.zero:
        return 0j
    total = ph + DyadicPhase.octants(g.octant)
    mag = 2.0 ** (g.half_exp / 2)
    if total.is_zero():
        return complex(mag)
    return complex(mag * total.to_complex())
