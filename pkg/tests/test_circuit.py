from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magicdepth import oracle
from magicdepth.circuit import (
    IQP3,
    Circuit,
    CircuitFormatError,
    Gate,
    clifford_word,
    compose_almost_classical,
    layered_form,
    parse_circuit,
    propagate_basis,
    serialize_circuit,
)
from magicdepth.core import DyadicPhase

gate_strategy = st.one_of(
    st.builds(lambda q: Gate("H", (q,)), st.integers(0, 3)),
    st.builds(lambda q, p: Gate("T", (q,), Fraction(p, 4)), st.integers(0, 3), st.integers(-7, 7)),
    st.builds(lambda a, b: Gate("CNOT", (a, (a + b) % 4)), st.integers(0, 3), st.integers(1, 3)),
    st.builds(lambda a: Gate("CCZ", (a, (a + 1) % 4, (a + 2) % 4)), st.integers(0, 3)),
    st.builds(lambda a, b: Gate("CS", (a, (a + b) % 4)), st.integers(0, 3), st.integers(1, 3)),
    st.builds(lambda q, v: Gate("DIAG", (q,), table=(DyadicPhase(), DyadicPhase(v, 3))),
              st.integers(0, 3), st.integers(0, 15)),
)


@settings(max_examples=60)
@given(st.lists(gate_strategy, max_size=12))
def test_serialization_roundtrip(gates):
    c = Circuit(4, gates)
    text = serialize_circuit(c)
    back = parse_circuit(text)
    assert back.gates == c.gates
    assert serialize_circuit(back) == text


def test_parse_documented_example():
    text = """{"n": 2, "ancilla": [], "gates": [
      {"g": "H", "q": [0]},
      {"g": "T", "q": [1], "pow_num": -1, "pow_den_log2": 1},
      {"g": "DIAG", "q": [0], "phases": {"denom_log2": 3, "num": [0, 1]}}
    ]}"""
    c = parse_circuit(text)
    assert c.gates[1].power == Fraction(-1, 2)
    assert c.gates[2].phase_table()[1] == DyadicPhase(1, 3)


@pytest.mark.parametrize("text,where", [
    ('{"n": 2, "gates": [', 1),
    ('{"n": 2, "gates": [\n  {"g": "H", "q": [0]},\n  {"g": "H", "q": [5]}\n]}', 3),
    ('{"n": 2, "gates": [\n  {"g": "FOO", "q": [0]}\n]}', 2),
    ('{"n": 2, "gates": [\n  {"g": "CNOT", "q": [0, 0]}\n]}', 2),
    ('{"n": 1, "gates": [\n  {"g": "T", "q": [0], "pow_num": 1, "pow_den_log2": 1, "zz": 1}\n]}', 2),
])
def test_parse_errors_report_location(text, where):
    with pytest.raises(CircuitFormatError) as e:
        parse_circuit(text)
    assert e.value.line == where


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("T", (0,), Fraction(1, 3))
    with pytest.raises(ValueError):
        Gate("H", (0, 1))
    with pytest.raises(ValueError):
        Gate("CCZ", (0, 1))


def test_classification():
    assert Gate("T", (0,)).level() == 3 and Gate("T", (0,)).is_magic()
    assert Gate("T", (0,), 2).is_clifford()
    assert Gate("CS", (0, 1)).level() == 3
    assert Gate("CCZ", (0, 1, 2)).level() == 3
    assert Gate("T", (0,), Fraction(1, 2)).level() == 4
    assert Gate("CCCZ", (0, 1, 2, 3)).level() == 4
    assert Gate("CNOT", (0, 1)).is_almost_classical and not Gate("H", (0,)).is_almost_classical
    assert Gate("T", (0,), 8).is_identity()
    assert Gate("TDG", (0,)).power == -1


@pytest.mark.parametrize("name,qubits", [("T", (0,)), ("CS", (0, 1)), ("CCZ", (0, 1, 2)), ("H", (0,)),
                                         ("CNOT", (1, 0)), ("SWAP", (0, 1)), ("Y", (0,)), ("SDG", (0,))])
def test_gate_matrix_matches_oracle(name, qubits):
    g = Gate(name, qubits)
    u = oracle.unitary(Circuit(3, [g]))
    v = g.matrix()
    assert np.allclose(v @ v.conj().T, np.eye(v.shape[0]))
    assert np.allclose(np.abs(u).sum(), (1 << (3 - g.k)) * np.abs(v).sum())


def test_inverse_circuit_is_identity():
    rng = np.random.default_rng(0)
    gates = [Gate("H", (0,)), Gate("T", (1,)), Gate("CNOT", (0, 2)), Gate("CCZ", (0, 1, 2)), Gate("CS", (2, 1))]
    c = Circuit(3, [gates[i] for i in rng.integers(0, 5, 20)])
    u = oracle.unitary(Circuit(3, c.gates + c.inverse().gates))
    assert np.allclose(u, np.eye(8))


def test_compose_almost_classical():
    a = Gate("CNOT", (0, 1))
    b = Gate("CS", (1, 2))
    ab = compose_almost_classical(a, b)
    ref = Circuit(3, [a, b])
    for x in range(8):
        bits = [(x >> (2 - j)) & 1 for j in range(3)]
        assert propagate_basis(Circuit(3, [ab]), bits) == propagate_basis(ref, bits)


def test_layered_form_is_greedy_and_exact():
    # diagonal Cliffords between magic gates do not open a new block
    c = Circuit(3, [Gate("H", (0,)), Gate("T", (0,)), Gate("CZ", (0, 1)), Gate("S", (2,)), Gate("CCZ", (0, 1, 2)),
                    Gate("H", (1,)), Gate("T", (1,)), Gate("CNOT", (0, 2))])
    lf = layered_form(c)
    assert lf.d == 2
    assert [len(layer.magic) for layer in lf.layers] == [2, 1]
    assert np.allclose(oracle.unitary(lf.to_circuit()), oracle.unitary(c))
    # a Hadamard on the qubit forces a new block, even when a later reordering could avoid it
    c2 = Circuit(3, [Gate("T", (0,)), Gate("CNOT", (1, 2)), Gate("T", (1,)), Gate("H", (0,)), Gate("T", (0,))])
    assert layered_form(c2).d == 3
    assert np.allclose(oracle.unitary(layered_form(c2).to_circuit()), oracle.unitary(c2))


def test_clifford_word_rejects_magic():
    with pytest.raises(ValueError):
        clifford_word([Gate("T", (0,))])


def test_iqp3():
    iqp = IQP3.coerce({"n": 3, "terms": [[2, 0, 1], [1]]})
    assert iqp.terms == ((0, 1, 2), (1,))
    assert IQP3.from_circuit(iqp.circuit()) == iqp
    assert list(iqp.f([[1, 1, 1], [0, 1, 0], [1, 0, 1]])) == [0, 1, 0]
    with pytest.raises(ValueError):
        IQP3(4, [(0, 1, 2, 3)])
    with pytest.raises(ValueError):
        IQP3(2, [(0, 0)])
