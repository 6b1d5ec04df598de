import numpy as np
import pytest

from conftest import rand_clifford_gates, rand_diag_layer, rand_pauli_str
from magicdepth import oracle
from magicdepth.circuit import Circuit, Gate
from magicdepth.core import PauliString
from magicdepth.exact import (
    DenseGate,
    ch3_conjugate,
    exact_pauli_ch3,
    exact_pauli_circuit,
    recognize_clifford,
    split_depth_one,
    word_matrix,
)
from magicdepth.quadform import GaussSum

P = PauliString.from_str
BELL = Circuit(2, [Gate("H", (0,)), Gate("CNOT", (0, 1))])


def test_t_bell_xy():
    assert exact_pauli_ch3(BELL, [Gate("T", (0,)), Gate("T", (1,))], P("XY")) == pytest.approx(1.0)


def test_ht_z_is_zero_and_exact_form():
    h = Circuit(1, [Gate("H", (0,))])
    assert exact_pauli_ch3(h, [Gate("T", (0,))], P("Z")) == pytest.approx(0)
    val, g, ph = exact_pauli_ch3(h, [Gate("T", (0,))], P("X"), exact=True)
    assert val == pytest.approx(2 ** -0.5)
    assert not g.zero and g.half_exp == -1
    assert complex(g) * ph.to_complex() == pytest.approx(val)


def test_exact_form_zero():
    _, g, _ = exact_pauli_ch3(Circuit(1, []), [Gate("T", (0,))], P("X"), exact=True)
    assert g == GaussSum(True)


@pytest.mark.parametrize("gate", [Gate("T", (0,)), Gate("T", (0,), 3), Gate("CS", (0, 1)), Gate("CCZ", (0, 1, 2))])
def test_ch3_conjugate_matches_matrix(gate):
    k = gate.k
    for letter in "XYZ":
        for q in range(k):
            p = PauliString.single(k, q, letter)
            lc = ch3_conjugate(gate, p)
            g = gate.matrix()
            assert np.allclose(lc.matrix(), g.conj().T @ p.matrix() @ g)


def test_ch3_conjugate_rejects_fourth_level():
    with pytest.raises(ValueError):
        ch3_conjugate(Gate("T", (0,), 0.5), P("X"))


def test_recognize_clifford_phase():
    m = np.exp(1j * np.pi / 4) * word_matrix([("H", (0,)), ("CNOT", (0, 1)), ("S", (1,))], 2)
    word, phase = recognize_clifford(m)
    assert np.allclose(phase.to_complex() * word_matrix(word, 2), m)
    assert recognize_clifford(np.diag([1, np.exp(1j * np.pi / 4)])) is None


@pytest.mark.parametrize("seed", range(40))
def test_random_against_dense(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 8))
    u_cl = Circuit(n, rand_clifford_gates(n, 3 * n, rng))
    layer = rand_diag_layer(n, rng)
    u_cr = rand_clifford_gates(n, 2 * n, rng)
    p = P(rng.choice(["+", "-"]) + rand_pauli_str(n, rng))
    truth = oracle.expectation(oracle.simulate(Circuit(n, u_cl.gates + layer + u_cr)), p)
    assert abs(exact_pauli_ch3(u_cl, layer, p, u_cr=u_cr) - truth) < 1e-9
    full = Circuit(n, u_cl.gates + layer + u_cr)
    assert abs(exact_pauli_circuit(full, p) - truth) < 1e-9


def test_dense_gate_layer():
    rng = np.random.default_rng(3)
    c = Circuit(2, rand_clifford_gates(2, 5, rng) + [Gate("CS", (0, 1))] + rand_clifford_gates(2, 5, rng))
    g = DenseGate(oracle.unitary(c), (1, 2))
    u = Circuit(3, [Gate("H", (q,)) for q in range(3)] + [Gate("CNOT", (0, 2))])
    st = oracle.simulate(u)
    st.apply_matrix(g.matrix, g.qubits)
    for s in ("XYZ", "IZX", "ZZI"):
        assert exact_pauli_ch3(u, [g], P(s)) == pytest.approx(oracle.expectation(st, P(s)))


def test_input_validation():
    with pytest.raises(ValueError):
        exact_pauli_ch3(BELL, [Gate("T", (0,)), Gate("CS", (0, 1))], P("XX"))
    with pytest.raises(ValueError):
        exact_pauli_ch3(BELL, [], PauliString.from_str("XX").with_phase(1))
    with pytest.raises(ValueError):
        DenseGate(np.ones((2, 2)), (0,))
    with pytest.raises(ValueError):
        split_depth_one(Circuit(1, [Gate("T", (0,)), Gate("H", (0,)), Gate("T", (0,))]))
