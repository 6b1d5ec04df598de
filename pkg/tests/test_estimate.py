import numpy as np
import pytest

from conftest import rand_clifford_gates, rand_diag_layer, rand_pauli_str
from magicdepth import oracle
from magicdepth.circuit import IQP3, Circuit, Gate
from magicdepth.core import PauliString
from magicdepth.estimate import (
    DepthOneProblem,
    EstimatorConfig,
    ExplicitFamily,
    PhaseOracle,
    ZProductFamily,
    estimate_amplitude,
    estimate_marginal,
    estimate_observable,
    estimate_probability,
    exact_family_mean,
    median_of_means,
    push_through,
    sample_marginal,
    z_images,
)

P = PauliString.from_str
T_BELL = Circuit(2, [Gate("H", (0,)), Gate("CNOT", (0, 1)), Gate("T", (0,)), Gate("T", (1,))])


def _instance(seed, n=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(2, 7))
    u_cl = Circuit(n, rand_clifford_gates(n, 3 * n, rng))
    layer = rand_diag_layer(n, rng)
    u_cr = rand_clifford_gates(n, 3 * n, rng)
    st = oracle.simulate(Circuit(n, u_cl.gates + layer + u_cr))
    return rng, n, u_cl, layer, u_cr, st


def test_config_sizes():
    cfg = EstimatorConfig(0.05, 0.05)
    assert cfg.groups == 30 and cfg.group_size == 1600
    small = EstimatorConfig(0.1, 0.1, samples_override=100)
    assert small.groups == 24 and small.group_size == 5
    with pytest.raises(ValueError):
        EstimatorConfig(0, 0.1)
    with pytest.raises(ValueError):
        EstimatorConfig(0.1, 1)


def test_median_of_means():
    v = np.array([1, 1, 1, 100, 1, 1], complex)
    assert median_of_means(v, 3) == pytest.approx(1)


def test_push_through_identity():
    d = PhaseOracle.from_gates(2, [Gate("T", (0,)), Gate("CS", (0, 1))])
    p = P("XZ")
    dp = push_through(d, p)
    dm = np.diag(np.exp(1j * d.evaluate_batch([[0, 0], [0, 1], [1, 0], [1, 1]])))
    dpm = np.diag(np.exp(1j * dp.evaluate_batch([[0, 0], [0, 1], [1, 0], [1, 1]])))
    assert np.allclose(dm.conj().T @ p.matrix() @ dm, p.matrix() @ dpm)
    assert push_through(d, P("ZZ")).is_trivial


def test_iqp_oracle():
    d = PhaseOracle.from_iqp3(IQP3(3, [(0, 1, 2)]))
    assert d.evaluate([1, 1, 1]) == pytest.approx(np.pi)
    assert d.evaluate([1, 1, 0]) == 0


def test_t_bell_estimate():
    prob = DepthOneProblem.from_circuit(T_BELL)
    r = estimate_observable(prob, None, P("XY"), EstimatorConfig(0.1, 0.05, seed=3))
    assert abs(r.value - 1) <= 0.1
    assert r.samples_used == r.groups * EstimatorConfig(0.1, 0.05).group_size
    assert exact_family_mean(prob, None, P("XY")) == pytest.approx(1)


def test_deterministic_given_seed():
    prob = DepthOneProblem.from_circuit(T_BELL)
    cfg = EstimatorConfig(0.2, 0.1, seed=7)
    a = estimate_observable(prob, None, P("XX"), cfg).value
    b = estimate_observable(prob, None, P("XX"), cfg).value
    assert a == b


@pytest.mark.parametrize("seed", range(15))
def test_enumeration_is_exact(seed):
    rng, n, u_cl, layer, u_cr, st = _instance(seed)
    p = P(rand_pauli_str(n, rng))
    assert abs(exact_family_mean(u_cl, layer, p, u_cr=u_cr) - oracle.expectation(st, p)) < 1e-12
    x = rng.integers(0, 2, n)
    idx = int("".join(map(str, x)), 2)
    fam = ZProductFamily(z_images(u_cr, range(n), n), x)
    assert abs(exact_family_mean(u_cl, layer, fam) - abs(st.amps[idx]) ** 2) < 1e-12
    amp = estimate_amplitude(u_cl, layer, u_cr, x, enumerate_all=True).value
    assert abs(amp - st.amps[idx]) < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_estimates_within_epsilon(seed):
    rng, n, u_cl, layer, u_cr, st = _instance(100 + seed)
    cfg = EstimatorConfig(0.1, 0.05, seed=seed)
    p = P(rand_pauli_str(n, rng))
    assert abs(estimate_observable(u_cl, layer, p, cfg, u_cr=u_cr).value - oracle.expectation(st, p)) <= 0.1
    x = rng.integers(0, 2, n)
    idx = int("".join(map(str, x)), 2)
    assert abs(estimate_probability(u_cl, layer, u_cr, x, cfg).value - abs(st.amps[idx]) ** 2) <= 0.1
    assert abs(estimate_amplitude(u_cl, layer, u_cr, x, cfg).value - st.amps[idx]) <= 0.1
    qs = [0, n - 1]
    r = estimate_probability(u_cl, layer, u_cr, [1, 0], cfg, qubits=qs)
    assert abs(r.value - oracle.distribution(st, qs)[2]) <= 0.1


def test_explicit_family_is_uniform_average():
    prob = DepthOneProblem.from_circuit(T_BELL)
    fam = ExplicitFamily([P("XY"), P("ZI")], [2.0, -1.0])
    st = oracle.simulate(T_BELL)
    truth = (2.0 * oracle.expectation(st, P("XY")) - oracle.expectation(st, P("ZI"))) / 2
    assert exact_family_mean(prob, None, fam) == pytest.approx(truth)


def test_marginals_and_sampling():
    _, n, u_cl, layer, u_cr, st = _instance(7, n=6)
    cfg = EstimatorConfig(0.05, 0.05, seed=1)
    est, res = estimate_marginal(u_cl, layer, u_cr, [1, 4], cfg)
    assert oracle.total_variation_distance(est, oracle.distribution(st, [1, 4])) <= 0.05
    samples, q = sample_marginal(u_cl, layer, u_cr, [1, 4], cfg, n_samples=500, return_probs=True)
    assert samples.shape == (500, 2) and q.sum() == pytest.approx(1) and (q >= 0).all()
    emp = np.bincount(samples[:, 0] * 2 + samples[:, 1], minlength=4) / 500
    assert oracle.total_variation_distance(emp, q) < 0.1


def test_trivial_diagonal_amplitude_is_exact():
    c = Circuit(3, [Gate("H", (0,)), Gate("CNOT", (0, 2)), Gate("S", (2,))])
    amp = estimate_amplitude(c, None, None, [1, 0, 1]).value
    assert amp == pytest.approx(oracle.simulate(c).amps[5])


def test_rejects_unknown_size():
    with pytest.raises(ValueError):
        estimate_observable([Gate("H", (0,))], [Gate("T", (0,))], P("Z"))
