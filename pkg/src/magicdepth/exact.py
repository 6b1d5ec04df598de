"""Exact Pauli expectations for a Clifford circuit followed by one layer of
local third-level gates.

Each magic gate ``G`` turns ``P`` into ``G^dagger P G``, which is a Clifford on
the gate's support.  The expectation is then a stabilizer inner product.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .circuit import Circuit, Gate, clifford_word, layered_form
from .core import DyadicPhase, PauliString
from .oracle import CLIFFORD_MATRICES
from .stabilizer import (
    StabilizerTableau,
    _conjugate_rows,
    apply_local_clifford_to_affine,
    conjugate_pauli,
    inner_product,
    inner_product_exact,
    invert_word,
    to_affine_form,
)

TOL = 1e-9


@dataclass(frozen=True)
class DenseGate:
    """A unitary on at most three qubits given by its matrix (big-endian)."""

    matrix: np.ndarray
    qubits: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, complex)
        k = len(self.qubits)
        if m.shape != (1 << k, 1 << k):
            raise ValueError(f"matrix shape {m.shape} does not match {k} qubit(s)")
        if not np.allclose(m.conj().T @ m, np.eye(1 << k), atol=TOL):
            raise ValueError("matrix is not unitary")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))


@dataclass
class LocalCliffordWithPhase:
    support: tuple
    word: list
    global_phase: DyadicPhase

    def matrix(self) -> np.ndarray:
        """Dense matrix on ``support`` (in that order)."""
        pos = {q: i for i, q in enumerate(self.support)}
        return self.global_phase.to_complex() * word_matrix(
            [(g, tuple(pos[q] for q in qs)) for g, qs in self.word], len(self.support))


def word_matrix(word, k: int) -> np.ndarray:
    """Matrix of a Clifford word on ``k`` qubits (first gate applied first)."""
    dim = 1 << k
    out = np.eye(dim, dtype=complex).reshape((2,) * k + (dim,))
    for g, qs in word:
        qs = list(qs)
        m = CLIFFORD_MATRICES[g].reshape((2,) * (2 * len(qs)))
        t = np.tensordot(m, out, axes=(list(range(len(qs), 2 * len(qs))), qs))
        out = np.moveaxis(t, list(range(len(qs))), qs)
    return out.reshape(dim, dim)


def _gate_matrix(gate) -> np.ndarray:
    if isinstance(gate, DenseGate):
        return gate.matrix
    if gate.is_diagonal and gate.name != "ORACLE":
        return np.diag([p.to_complex() for p in gate.phase_table()])
    return gate.matrix()


def _match_pauli(m: np.ndarray, k: int) -> PauliString | None:
    """Phased Pauli equal to ``m`` within tolerance, if any."""
    dim = 1 << k
    for bits in product((0, 1), repeat=2 * k):
        p = PauliString(np.array(bits[:k]), np.array(bits[k:]))
        c = np.trace(p.matrix().conj().T @ m) / dim
        if abs(abs(c) - 1) < TOL:
            ip = int(np.round(np.angle(c) / (np.pi / 2))) % 4
            cand = p.with_phase(ip)
            if np.allclose(cand.matrix(), m, atol=TOL):
                return cand
            return None
    return None


def synthesize_clifford(images_x, images_z) -> list:
    """Word ``W`` with ``W X_j W^dag = images_x[j]`` and ``W Z_j W^dag = images_z[j]``.

    Reduces the image tableau to the identity with conjugations; the word is the
    inverse of the reduction sequence.
    """
    k = len(images_x)
    rows = list(images_x) + list(images_z)
    x = np.array([p.x for p in rows], np.uint8)
    z = np.array([p.z for p in rows], np.uint8)
    ph = np.array([p.i_power for p in rows], np.int64)
    seq = []

    def do(g, *qs):
        _conjugate_rows(x, z, ph, g, qs)
        seq.append((g, qs))

    for j in range(k):
        r = j
        if not (x[r, j:].any() or z[r, j:].any()):
            raise ValueError("images are not independent")
        for q in range(j, k):
            if x[r, q] and z[r, q]:
                do("S", q)
            elif z[r, q]:
                do("H", q)
        if not x[r, j]:
            q = j + int(np.flatnonzero(x[r, j:])[0])
            do("SWAP", j, q)
        for q in range(j + 1, k):
            if x[r, q]:
                do("CNOT", j, q)
        r = k + j
        if x[r, j]:
            # fixes X_j, sends Y_j to Z_j
            do("H", j)
            do("S", j)
            do("H", j)
        for q in range(j + 1, k):
            if x[r, q] and z[r, q]:
                do("S", q)
                do("H", q)
            elif x[r, q]:
                do("H", q)
        for q in range(j + 1, k):
            if z[r, q]:
                do("CNOT", q, j)
    for j in range(k):
        if ph[j] % 4 == 2:
            do("Z", j)
        if ph[k + j] % 4 == 2:
            do("X", j)
    if x[:k].tolist() != np.eye(k, dtype=np.uint8).tolist() or z[k:].tolist() != np.eye(k, dtype=np.uint8).tolist() \
            or x[k:].any() or z[:k].any() or (ph % 4).any():
        raise ValueError("images do not form a Clifford tableau")
    return invert_word(seq)


def recognize_clifford(m: np.ndarray):
    """``(word, DyadicPhase)`` with ``m == e^{i phase} * word_matrix(word)``; ``None`` if not Clifford."""
    m = np.asarray(m, complex)
    k = int(np.log2(m.shape[0]))
    imx, imz = [], []
    for j in range(k):
        for letter, out in (("X", imx), ("Z", imz)):
            p = PauliString.single(k, j, letter).matrix()
            img = _match_pauli(m @ p @ m.conj().T, k)
            if img is None:
                return None
            out.append(img)
    try:
        word = synthesize_clifford(imx, imz)
    except ValueError:
        return None
    w = word_matrix(word, k)
    i, j = np.unravel_index(np.argmax(np.abs(w)), w.shape)
    ang = np.angle(m[i, j] / w[i, j])
    octs = ang / (np.pi / 4)
    if abs(octs - round(octs)) > 1e-7:
        return None
    phase = DyadicPhase.octants(int(round(octs)) % 8)
    if not np.allclose(phase.to_complex() * w, m, atol=TOL):
        return None
    return word, phase


def ch3_conjugate(gate, p_local: PauliString) -> LocalCliffordWithPhase:
    """``gate^dagger p_local gate`` as a Clifford word with a global phase."""
    qubits = gate.qubits
    if p_local.n != len(qubits):
        raise ValueError(f"Pauli acts on {p_local.n} qubits, gate on {len(qubits)}")
    if len(qubits) > 3:
        raise ValueError("local gates act on at most three qubits")
    g = _gate_matrix(gate)
    res = recognize_clifford(g.conj().T @ p_local.matrix() @ g)
    if res is None:
        raise ValueError(f"{gate} is not in the third level of the Clifford hierarchy")
    word, phase = res
    return LocalCliffordWithPhase(qubits, [(n, tuple(qubits[i] for i in qs)) for n, qs in word], phase)


def _clifford_word(c):
    if c is None:
        return []
    if isinstance(c, Circuit):
        return clifford_word(c.gates)[0]
    c = list(c)
    if c and isinstance(c[0], Gate):
        return clifford_word(c)[0]
    return c


def exact_pauli_ch3(u_cl, magic_layer, p: PauliString, u_cr=None, return_complex: bool = False,
                    exact: bool = False):
    """``<0|U^dag P U|0>`` for ``U = U_cr * (prod G_i) * U_cl``.

    ``u_cl`` / ``u_cr`` are Clifford circuits (or words); ``magic_layer`` holds
    gates with pairwise disjoint supports of size at most three.  With
    ``exact`` the result is ``(value, GaussSum, DyadicPhase)``, the value being
    ``GaussSum * exp(i phase)``.
    """
    if not p.is_hermitian():
        raise ValueError("observable must be Hermitian")
    n = p.n
    if isinstance(u_cl, Circuit) and u_cl.n != n:
        raise ValueError(f"circuit has {u_cl.n} qubits, observable {n}")
    seen: set = set()
    for g in magic_layer:
        if seen & set(g.qubits):
            raise ValueError("magic-layer supports overlap")
        seen |= set(g.qubits)
    if u_cr is not None:
        p = conjugate_pauli(p, _clifford_word(u_cr), dagger=True)
    tab = StabilizerTableau.from_circuit(n, _clifford_word(u_cl))
    psi = to_affine_form(tab)
    # P = i^k prod_q X^x Z^z; local factors get their own Hermitian phase
    n_y_total = 0
    phi = psi
    for g in magic_layer:
        loc = p.restrict(g.qubits)
        ny = int(np.dot(loc.x.astype(np.int64), loc.z))
        n_y_total += ny
        lc = ch3_conjugate(g, loc.with_phase(ny))
        phi = apply_local_clifford_to_affine(phi, lc.word, lc.global_phase)
    rest = [q for q in range(n) if q not in seen]
    word = [("Z", (q,)) for q in rest if p.z[q]] + [("X", (q,)) for q in rest if p.x[q]]
    phase = DyadicPhase.octants(2 * ((p.i_power - n_y_total) % 4))
    phi = apply_local_clifford_to_affine(phi, word, phase)
    val = inner_product(psi, phi)
    if exact:
        g, ph = inner_product_exact(psi, phi)
        return (val if return_complex else float(val.real)), g, ph
    if return_complex:
        return val
    if abs(val.imag) > 1e-9:
        raise ArithmeticError(f"imaginary residue {val.imag:.3e} for a Hermitian observable")
    return float(val.real)


def split_depth_one(c: Circuit):
    """``(u_cl, magic_layer, u_cr)`` of a circuit with at most one magic layer."""
    lf = layered_form(c)
    if lf.d > 1:
        raise ValueError(f"circuit has magic depth {lf.d}; one layer expected")
    if lf.d == 0:
        return Circuit(c.n, lf.tail), [], None
    layer = lf.layers[0]
    return Circuit(c.n, layer.clifford), list(layer.magic), Circuit(c.n, lf.tail)


def exact_pauli_circuit(c: Circuit, p: PauliString, **kw):
    u_cl, layer, u_cr = split_depth_one(c)
    return exact_pauli_ch3(u_cl, layer, p, u_cr=u_cr, **kw)
