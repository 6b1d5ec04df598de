import numpy as np
import pytest

from magicdepth.core import PauliString
from magicdepth.oracle import DenseState, apply_pauli
from magicdepth.stabilizer import (
    AffineForm,
    StabilizerTableau,
    apply_local_clifford_to_affine,
    canonicalize,
    conjugate_pauli,
    inner_product,
    invert_word,
    to_affine_form,
    zblock_to_affine,
)

G1 = ("H", "S", "SDG", "X", "Y", "Z")
G2 = ("CNOT", "CZ", "SWAP")


def rword(n, m, rng):
    w = []
    for _ in range(m):
        if n > 1 and rng.random() < 0.4:
            a, b = rng.choice(n, 2, replace=False)
            w.append((G2[rng.integers(3)], (int(a), int(b))))
        else:
            w.append((G1[rng.integers(6)], (int(rng.integers(n)),)))
    return w


def dense(n, word, init=None):
    st = DenseState(n) if init is None else DenseState(n, init)
    for g, q in word:
        st.apply_gate(g, q)
    return st.amps


@pytest.mark.parametrize("seed", range(60))
def test_tableau_and_affine_form_match_dense(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    w = rword(n, int(rng.integers(0, 30)), rng)
    tab = StabilizerTableau.from_circuit(n, w)
    tab.validate()
    v = dense(n, w)
    for p in tab.generators:
        assert np.allclose(apply_pauli(p, v), v)
    a = to_affine_form(tab)
    a.check()
    va = a.to_statevector()
    assert abs(abs(np.vdot(va, v)) - 1) < 1e-9
    # lexicographically first support string carries phase 0
    first = np.flatnonzero(np.abs(va) > 1e-9)[0]
    assert abs(np.angle(va[first])) < 1e-9


@pytest.mark.parametrize("seed", range(40))
def test_affine_gate_updates_track_global_phase(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(1, 6))
    a = to_affine_form(StabilizerTableau.from_circuit(n, rword(n, 15, rng)))
    w = rword(n, 12, rng)
    b = apply_local_clifford_to_affine(a, w)
    b.check()
    assert np.allclose(b.to_statevector(), dense(n, w, a.to_statevector()), atol=1e-9)


@pytest.mark.parametrize("seed", range(40))
def test_inner_product(each_backend, seed):
    rng = np.random.default_rng(200 + seed)
    n = int(rng.integers(1, 7))
    a = to_affine_form(StabilizerTableau.from_circuit(n, rword(n, 20, rng)))
    b = a.copy().apply_word(rword(n, 3, rng)) if seed % 2 else to_affine_form(
        StabilizerTableau.from_circuit(n, rword(n, 20, rng)))
    ref = np.vdot(a.to_statevector(), b.to_statevector())
    assert abs(inner_product(a, b) - ref) < 1e-12
    assert inner_product(b, b) == 1


def test_zero_and_basis_states():
    a = AffineForm.basis_state([1, 0, 1])
    v = a.to_statevector()
    assert v[5] == 1 and np.count_nonzero(v) == 1
    assert inner_product(AffineForm.zero_state(3), a) == 0


@pytest.mark.parametrize("seed", range(20))
def test_conjugate_pauli(seed):
    rng = np.random.default_rng(300 + seed)
    n = int(rng.integers(1, 5))
    w = rword(n, 10, rng)
    p = PauliString.from_str("".join(rng.choice(list("IXYZ"), n)))
    u = np.eye(1 << n, dtype=complex)
    for j in range(1 << n):
        u[:, j] = dense(n, w, np.eye(1 << n)[j].astype(complex))
    assert np.allclose(conjugate_pauli(p, w).matrix(), u @ p.matrix() @ u.conj().T)
    assert np.allclose(conjugate_pauli(p, w, dagger=True).matrix(), u.conj().T @ p.matrix() @ u)
    back = conjugate_pauli(conjugate_pauli(p, w), invert_word(w))
    assert np.allclose(back.matrix(), p.matrix())


def test_canonical_form_bell():
    can = canonicalize(StabilizerTableau.from_paulis(["XX", "ZZ"]))
    assert len(can.s_x) == 1 and len(can.s_z) == 1
    assert can.s_z[0].is_diagonal()


def test_zblock_affine():
    aff = zblock_to_affine([PauliString.from_str("-ZI")])
    assert aff.contains([1, 0]) and aff.contains([1, 1]) and not aff.contains([0, 0])


def test_rejects_bad_tableau():
    with pytest.raises(ValueError):
        StabilizerTableau(np.zeros((2, 2)), np.zeros((3, 2)), [0, 0])
