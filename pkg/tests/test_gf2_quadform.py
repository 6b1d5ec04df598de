import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magicdepth import gf2
from magicdepth.quadform import GaussSum, Z8Form, gauss_sum_bruteforce, quadratic_gauss_sum

matrices = st.tuples(st.integers(1, 10), st.integers(1, 70)).flatmap(
    lambda s: st.lists(st.lists(st.integers(0, 1), min_size=s[1], max_size=s[1]), min_size=s[0], max_size=s[0]))


def _rank_dense(m):
    m = np.array(m, np.uint8) % 2
    r = 0
    for c in range(m.shape[1]):
        rows = [i for i in range(r, m.shape[0]) if m[i, c]]
        if not rows:
            continue
        m[[r, rows[0]]] = m[[rows[0], r]]
        for i in range(m.shape[0]):
            if i != r and m[i, c]:
                m[i] ^= m[r]
        r += 1
    return r


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_rank_and_rref(mat):
    m = np.array(mat, np.uint8)
    red, piv = gf2.rref(m)
    assert gf2.rank(m) == _rank_dense(m) == piv.size
    assert np.array_equal(red[:, piv], np.eye(piv.size, dtype=np.uint8))


@pytest.mark.parametrize("seed", range(20))
def test_backends_agree_and_solve(each_backend, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, (int(rng.integers(1, 8)), int(rng.integers(1, 80)))).astype(np.uint8)
    x = rng.integers(0, 2, a.shape[1]).astype(np.uint8)
    b = a @ x % 2
    x0, ker = gf2.solve_affine(a, b)
    assert np.array_equal(a @ x0 % 2, b)
    assert not (a.astype(int) @ ker % 2).any()
    assert ker.shape[1] == a.shape[1] - gf2.rank(a)


def test_solve_inconsistent():
    assert gf2.solve_affine([[1, 1], [1, 1]], [0, 1]) is None


def test_pack_roundtrip():
    m = np.random.default_rng(0).integers(0, 2, (5, 130)).astype(np.uint8)
    assert np.array_equal(gf2.unpack_rows(gf2.pack_rows(m), 130), m)


def _random_form(r, rng):
    q = np.triu(rng.integers(0, 2, (r, r)), 1)
    return Z8Form(r, int(rng.integers(8)), 2 * rng.integers(0, 4, r), q + q.T)


@pytest.mark.parametrize("seed", range(40))
def test_gauss_sum_matches_bruteforce(each_backend, seed):
    rng = np.random.default_rng(seed)
    f = _random_form(int(rng.integers(0, 11)), rng)
    assert np.isclose(complex(f.gauss_sum()), gauss_sum_bruteforce(f), atol=1e-9)


def test_gauss_sum_special_cases():
    f = Z8Form(1, 0, [4])
    assert f.gauss_sum() == GaussSum(True)
    assert complex(quadratic_gauss_sum(0, [0, 0], [[0, 4], [4, 0]])) == pytest.approx(2)


def test_quadratic_gauss_sum_validates():
    with pytest.raises(ValueError):
        quadratic_gauss_sum(0, [0, 0], [[0, 2], [2, 0]])


def test_gauss_sum_algebra():
    g = GaussSum(False, 2, 3)
    assert complex(g * g.conj()) == pytest.approx(4)
    assert (g * GaussSum(True)).zero
    assert complex(g.scaled(-2, 5)) == pytest.approx(complex(GaussSum(False, 0, 0)))
