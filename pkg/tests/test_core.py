from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magicdepth.core import (
    DyadicPhase,
    PauliString,
    PhasePolynomial,
    bits_to_index,
    hierarchy_level,
    index_to_bits,
    parity_rotation_angles,
    pauli_multiply,
    phase_table_to_polynomial,
)

phases = st.builds(DyadicPhase, st.integers(-64, 64), st.integers(0, 5))
paulis = st.integers(1, 5).flatmap(
    lambda n: st.builds(lambda s, k: PauliString.from_str(s).with_phase(k),
                        st.text("IXYZ", min_size=n, max_size=n), st.integers(0, 3)))


@given(phases, phases)
def test_dyadic_add_matches_complex(a, b):
    assert np.isclose((a + b).to_complex(), a.to_complex() * b.to_complex())
    assert (a - a).is_zero()


def test_dyadic_normal_form():
    assert DyadicPhase(2, 2) == DyadicPhase(1, 1)
    assert DyadicPhase(8, 2) == DyadicPhase()
    assert DyadicPhase.from_fraction(Fraction(3, 4)).to_octants() == 3
    with pytest.raises(ValueError):
        DyadicPhase.from_fraction(Fraction(1, 3))
    with pytest.raises(ValueError):
        DyadicPhase(1, 3).to_octants()


@given(st.integers(0, 255))
def test_bits_roundtrip(i):
    assert bits_to_index(index_to_bits(i, 8)) == i


def test_pauli_parsing_and_matrix():
    y = PauliString.from_str("Y")
    assert np.allclose(y.matrix(), [[0, -1j], [1j, 0]])
    assert y.is_hermitian()
    assert PauliString.from_str("-XZ").weight() == 2
    assert PauliString.from_str("IZ").is_diagonal()
    with pytest.raises(ValueError):
        PauliString.from_str("XQ")


@settings(max_examples=50)
@given(paulis, st.data())
def test_pauli_multiply_matches_matrices(p, data):
    q = data.draw(st.builds(lambda s: PauliString.from_str(s), st.text("IXYZ", min_size=p.n, max_size=p.n)))
    assert np.allclose(pauli_multiply(p, q).matrix(), p.matrix() @ q.matrix())
    comm = np.allclose(p.matrix() @ q.matrix(), q.matrix() @ p.matrix())
    assert p.commutes(q) == comm


@settings(max_examples=50)
@given(st.integers(1, 4).flatmap(lambda k: st.lists(st.integers(0, 15), min_size=1 << k, max_size=1 << k)))
def test_moebius_inversion_roundtrip(nums):
    table = [DyadicPhase(v, 3) for v in nums]
    poly = phase_table_to_polynomial(table)
    assert poly.table() == table


def test_hierarchy_levels():
    t = phase_table_to_polynomial([DyadicPhase(), DyadicPhase(1, 2)])
    ccz = phase_table_to_polynomial([DyadicPhase()] * 7 + [DyadicPhase(1, 0)])
    cs = phase_table_to_polynomial([DyadicPhase()] * 3 + [DyadicPhase(1, 1)])
    assert hierarchy_level(t) == 3 and hierarchy_level(ccz) == 3 and hierarchy_level(cs) == 3
    assert hierarchy_level(PhasePolynomial(2, {(0, 1): 1})) == 2
    assert hierarchy_level(PhasePolynomial(1, {})) == 1


@settings(max_examples=30)
@given(st.integers(1, 4).flatmap(lambda k: st.lists(st.integers(-8, 8), min_size=1 << k, max_size=1 << k)))
def test_parity_rotation_reconstructs(vals):
    angles = [Fraction(v, 4) for v in vals]
    k = len(angles).bit_length() - 1
    rot = parity_rotation_angles(angles)
    for x in range(1 << k):
        s = sum(a for y, a in rot.items() if bin(x & y).count("1") % 2)
        assert s == angles[x] - angles[0]
