from fractions import Fraction

import numpy as np
import pytest

from magicdepth import oracle
from magicdepth.circuit import IQP3, Circuit, Gate, register_oracle
from magicdepth.core import PauliString


def test_bell_state():
    st = oracle.simulate(Circuit(2, [Gate("H", (0,)), Gate("CNOT", (0, 1))]))
    assert np.allclose(st.amps, [2 ** -0.5, 0, 0, 2 ** -0.5])
    assert oracle.expectation(st, PauliString.from_str("XX")) == pytest.approx(1)
    assert oracle.expectation(st, PauliString.from_str("-YY")) == pytest.approx(1)
    assert np.allclose(oracle.distribution(st, [1]), [0.5, 0.5])


def test_big_endian_convention():
    st = oracle.simulate(Circuit(3, [Gate("X", (0,))]))
    assert oracle.amplitude(st, [1, 0, 0]) == 1
    assert st.amps[4] == 1


def test_iqp_bruteforce_values():
    assert oracle.iqp3_amplitude_bruteforce(IQP3(3, [(0, 1, 2)])) == Fraction(3, 4)
    assert oracle.iqp3_amplitude_bruteforce(IQP3(2, [])) == 1
    assert oracle.iqp3_amplitude_bruteforce(IQP3(1, [(0,)])) == 0


def test_tvd():
    assert oracle.total_variation_distance([1, 0], [0, 1]) == 1
    assert oracle.total_variation_distance([0.5, 0.5], [0.5, 0.5]) == 0


def test_dense_cap():
    with pytest.raises(ValueError):
        oracle.simulate(Circuit(30, []), cap=20)


@pytest.mark.parametrize("seed", range(10))
def test_sparse_matches_dense(seed):
    rng = np.random.default_rng(seed)
    names = [("H", 1), ("T", 1), ("CNOT", 2), ("CCZ", 3), ("CS", 2), ("S", 1)]
    gates = []
    for _ in range(25):
        g, k = names[rng.integers(len(names))]
        gates.append(Gate(g, tuple(int(q) for q in rng.choice(5, k, replace=False))))
    c = Circuit(5, gates)
    dense = oracle.simulate(c)
    sparse = oracle.simulate_sparse(c)
    assert np.allclose(sparse.to_dense(), dense.amps)
    p = PauliString.from_str("".join(rng.choice(list("IXYZ"), 5)))
    assert sparse.expectation(p) == pytest.approx(oracle.expectation(dense, p))


def test_sparse_beyond_64_qubits():
    n = 70
    gates = [Gate("H", (0,)), Gate("CNOT", (0, n - 1)), Gate("T", (n - 1,)), Gate("X", (35,))]
    st = oracle.simulate_sparse(Circuit(n, gates))
    assert st.expectation(PauliString.single(n, n - 1, "Z")) == pytest.approx(0)
    assert st.expectation(PauliString.single(n, 35, "Z")) == pytest.approx(-1)
    zz = PauliString.from_str("Z" + "I" * (n - 2) + "Z")
    assert st.expectation(zz) == pytest.approx(1)
    xx = PauliString.from_str("X" + "I" * (n - 2) + "X")
    assert st.expectation(xx) == pytest.approx(np.cos(np.pi / 4))


def test_registered_oracle_gate():
    register_oracle("parity_pi", lambda bits: np.pi * (bits.sum(axis=1) % 2))
    c = Circuit(2, [Gate("H", (0,)), Gate("H", (1,)), Gate("ORACLE", (0, 1), oracle="parity_pi")])
    st = oracle.simulate(c)
    assert np.allclose(st.amps, 0.5 * np.array([1, -1, -1, 1]))
    assert np.allclose(oracle.simulate_sparse(c).to_dense(), st.amps)


def test_unitary_of_ccz():
    u = oracle.unitary(Circuit(3, [Gate("CCZ", (0, 1, 2))]))
    assert np.allclose(u, np.diag([1] * 7 + [-1]))
