import numpy as np
import pytest

from conftest import all_bits, rand_clifford_gates, rand_diag_layer
from magicdepth import oracle
from magicdepth.circuit import Circuit, Gate
from magicdepth.estimate import PhaseOracle
from magicdepth.pathint import (
    BudgetExceeded,
    LayerStack,
    default_budget,
    estimate_branches,
    parse_budget,
    path_integral_amplitude,
    single_layer_amplitude,
)


def _layered(n, d, rng, tail=True):
    gates = []
    for _ in range(d):
        gates += rand_clifford_gates(n, 2 * n, rng) + rand_diag_layer(n, rng)
    if tail:
        gates += rand_clifford_gates(n, n, rng)
    return Circuit(n, gates)


@pytest.mark.parametrize("seed", range(12))
def test_all_amplitudes_match_dense(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(1, 5)), int(rng.integers(1, 4))
    c = _layered(n, d, rng, tail=bool(seed % 2))
    st = oracle.simulate(c)
    stack = LayerStack.from_circuit(c)
    for idx, x in enumerate(all_bits(n)):
        assert abs(path_integral_amplitude(stack, x) - st.amps[idx]) < 1e-10


@pytest.mark.parametrize("seed", range(6))
def test_pruning_preserves_value_and_bound(seed):
    rng = np.random.default_rng(50 + seed)
    n = 4
    c = _layered(n, 3, rng)
    x = rng.integers(0, 2, n)
    a = path_integral_amplitude(c, x, prune=True, full=True)
    b = path_integral_amplitude(c, x, prune=False, full=True)
    assert abs(a.value - b.value) < 1e-10
    assert a.branches <= b.branches <= b.bound
    assert a.branches <= a.bound
    assert set(a.to_dict()) >= {"branches", "bound"}


def test_depth_zero_and_clifford_tail():
    c = Circuit(2, [Gate("H", (0,)), Gate("CNOT", (0, 1))])
    st = oracle.simulate(c)
    for idx, x in enumerate(all_bits(2)):
        assert path_integral_amplitude(c, x) == pytest.approx(st.amps[idx])
    r = path_integral_amplitude(c, [1, 1], full=True)
    assert r.branches == 0


def test_t_bell_amplitudes():
    c = Circuit(2, [Gate("H", (0,)), Gate("CNOT", (0, 1)), Gate("T", (0,)), Gate("T", (1,))])
    assert path_integral_amplitude(c, [1, 1]) == pytest.approx(1j * 2 ** -0.5)
    assert path_integral_amplitude(c, [0, 1]) == pytest.approx(0)


def test_single_layer_amplitude():
    rng = np.random.default_rng(4)
    n = 3
    cl = rand_clifford_gates(n, 8, rng)
    layer = rand_diag_layer(n, rng)
    u = oracle.unitary(Circuit(n, cl + layer))
    d = PhaseOracle.from_gates(n, layer)
    for x in ((0, 1, 1), (1, 0, 0)):
        for y in ((0, 0, 0), (1, 1, 0)):
            ix = int("".join(map(str, x)), 2)
            iy = int("".join(map(str, y)), 2)
            assert single_layer_amplitude(cl, d, x, y) == pytest.approx(u[ix, iy])


def test_from_layers_with_oracle():
    n = 3
    h = [Gate("H", (q,)) for q in range(n)]
    d = PhaseOracle.from_gates(n, [Gate("CCZ", (0, 1, 2))])
    stack = LayerStack.from_layers(n, [(h, d)], tail=h)
    assert path_integral_amplitude(stack, [0, 0, 0]) == pytest.approx(0.75)
    assert stack.d == 1 and estimate_branches(stack) >= 1


def test_budget_and_input_errors():
    c = _layered(3, 2, np.random.default_rng(1))
    with pytest.raises(BudgetExceeded) as e:
        path_integral_amplitude(c, [0, 0, 0], budget=0)
    assert e.value.budget == 0 and e.value.estimate > 0
    with pytest.raises(ValueError):
        path_integral_amplitude(c, [0, 1])


def test_budget_parsing(monkeypatch):
    assert parse_budget("2^30") == parse_budget("1<<30") == parse_budget("2**30") == 1 << 30
    assert parse_budget(17) == 17
    monkeypatch.setenv("MAGICDEPTH_BUDGET", "2^4")
    assert default_budget() == 16
    c = _layered(3, 3, np.random.default_rng(2))
    if estimate_branches(LayerStack.from_circuit(c)) > 16:
        with pytest.raises(BudgetExceeded):
            path_integral_amplitude(c, [0, 0, 0])
    monkeypatch.delenv("MAGICDEPTH_BUDGET")
    assert default_budget() == 1 << 30
