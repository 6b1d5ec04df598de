import itertools
import math

import numpy as np
import pytest

from magicdepth import _accel
from magicdepth.circuit import Circuit, Gate, propagate_basis

CLIFFORD_1Q = ("H", "S", "SDG", "X", "Z")
CLIFFORD_2Q = ("CNOT", "CZ")


def rand_clifford_gates(n, m, rng):
    gates = []
    for _ in range(m):
        if n > 1 and rng.random() < 0.4:
            a, b = rng.choice(n, 2, replace=False)
            gates.append(Gate(CLIFFORD_2Q[rng.integers(2)], (int(a), int(b))))
        else:
            gates.append(Gate(CLIFFORD_1Q[rng.integers(len(CLIFFORD_1Q))], (int(rng.integers(n)),)))
    return gates


def rand_diag_layer(n, rng):
    """Disjoint T^k / CS / CCZ gates covering a random subset of qubits."""
    free = [int(q) for q in rng.permutation(n)]
    layer = []
    while free:
        k = int(rng.integers(1, min(3, len(free)) + 1))
        qs = tuple(sorted(free.pop() for _ in range(k)))
        if k == 1:
            layer.append(Gate("T", qs, int(rng.integers(1, 8))))
        elif k == 2:
            layer.append(Gate("CS", qs))
        else:
            layer.append(Gate("CCZ", qs))
    return layer


def rand_pauli_str(n, rng):
    return "".join(rng.choice(list("IXYZ"), n))


def bits_of(idx, n):
    return tuple((idx >> (n - 1 - j)) & 1 for j in range(n))


def all_bits(n):
    return itertools.product((0, 1), repeat=n)


def assert_same_basis_action(orig: Circuit, new: Circuit):
    """Equal permutation and phases on every input; extra wires start and end in |0>."""
    extra = new.n - orig.n
    for bits in all_bits(orig.n):
        y, ph = propagate_basis(orig, bits)
        y2, ph2 = propagate_basis(new, tuple(bits) + (0,) * extra)
        assert tuple(y2[: orig.n]) == tuple(y), bits
        assert not any(y2[orig.n:]), bits
        assert ph2 == ph, bits


def binom_tail(k, trials, p):
    """P[Binomial(trials, p) >= k]."""
    def log_term(i):
        return (math.lgamma(trials + 1) - math.lgamma(i + 1) - math.lgamma(trials - i + 1)
                + i * math.log(p) + (trials - i) * math.log1p(-p))

    return sum(math.exp(log_term(i)) for i in range(k, trials + 1))


def consistent_with_rate(failures, trials, rate, confidence=0.99):
    """Observed failures do not reject ``true rate <= rate`` at the given confidence."""
    return binom_tail(failures, trials, rate) >= 1 - confidence


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["numba", "numpy"])
def each_backend(request):
    if request.param == "numba" and not _accel.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    old = _accel.USE_NUMBA
    _accel.USE_NUMBA = request.param == "numba"
    yield request.param
    _accel.USE_NUMBA = old
