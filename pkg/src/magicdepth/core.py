"""Exact phase and Pauli algebra.

Conventions used throughout the package:

* A bitstring ``x`` over ``n`` qubits is written ``x_0 x_1 ... x_{n-1}``; as a
  dense-vector index qubit 0 is the most significant bit.
* A Pauli operator is ``i**i_power * X^x Z^z`` with the X factor to the left
  of the Z factor on every qubit, so ``Y = i X Z``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "DyadicPhase",
    "PauliString",
    "PhasePolynomial",
    "pauli_multiply",
    "pauli_decompose_xz",
    "phase_table_to_polynomial",
    "parity_rotation_angles",
    "hierarchy_level",
    "bits_to_index",
    "index_to_bits",
]

MAX_TABLE_VARS = 16


def bits_to_index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | (int(b) & 1)
    return idx


def index_to_bits(idx: int, k: int) -> tuple:
    return tuple((idx >> (k - 1 - j)) & 1 for j in range(k))


@dataclass(frozen=True)
class DyadicPhase:
    """The unit complex number ``exp(i*pi*numerator / 2**denom_log2)``.

    The numerator is reduced modulo ``2**(denom_log2 + 1)`` and the
    denominator is kept minimal, so equal phases compare equal.
    """

    numerator: int = 0
    denom_log2: int = 0

    def __post_init__(self):
        num, m = int(self.numerator), int(self.denom_log2)
        if m < 0:
            num <<= -m
            m = 0
        num %= 1 << (m + 1)
        while m > 0 and num % 2 == 0:
            num //= 2
            m -= 1
        if num == 0:
            m = 0
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denom_log2", m)

    @classmethod
    def from_fraction(cls, frac) -> "DyadicPhase":
        """Phase ``exp(i*pi*frac)`` for a rational ``frac`` with power-of-two denominator."""
        frac = Fraction(frac)
        den = frac.denominator
        if den & (den - 1):
            raise ValueError(f"denominator {den} is not a power of two")
        return cls(frac.numerator, den.bit_length() - 1)

    @classmethod
    def octants(cls, k: int) -> "DyadicPhase":
        """``exp(i*pi*k/4)``."""
        return cls(k, 2)

    def as_fraction(self) -> Fraction:
        """Angle in units of pi, in ``[0, 2)``."""
        return Fraction(self.numerator, 1 << self.denom_log2)

    def __add__(self, other: "DyadicPhase") -> "DyadicPhase":
        m = max(self.denom_log2, other.denom_log2)
        return DyadicPhase(
            (self.numerator << (m - self.denom_log2)) + (other.numerator << (m - other.denom_log2)), m
        )

    def __neg__(self) -> "DyadicPhase":
        return DyadicPhase(-self.numerator, self.denom_log2)

    def __sub__(self, other: "DyadicPhase") -> "DyadicPhase":
        return self + (-other)

    def __mul__(self, k: int) -> "DyadicPhase":
        return DyadicPhase(self.numerator * int(k), self.denom_log2)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.numerator == 0

    @property
    def angle(self) -> float:
        return float(np.pi * self.numerator / (1 << self.denom_log2))

    def to_complex(self) -> complex:
        return complex(np.exp(1j * self.angle))

    def to_octants(self) -> int:
        """Angle in units of pi/4; raises if the phase is not such a multiple."""
        if self.denom_log2 > 2:
            raise ValueError(f"{self} is not a multiple of pi/4")
        return (self.numerator << (2 - self.denom_log2)) % 8

    def __repr__(self):
        return f"DyadicPhase({self.numerator}/2^{self.denom_log2} pi)"


def _bitvec(bits, n=None) -> np.ndarray:
    arr = np.array(bits, dtype=np.uint8).reshape(-1) & 1
    if n is not None and arr.size != n:
        raise ValueError(f"expected {n} bits, got {arr.size}")
    arr.setflags(write=False)
    return arr


_PREFIX_POWER = {"+": 0, "+i": 1, "-": 2, "-i": 3, "i": 1, "": 0}
_POWER_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}


@dataclass(frozen=True, eq=False)
class PauliString:
    """``i**i_power * prod_j X_j^{x_j} Z_j^{z_j}``."""

    x: np.ndarray
    z: np.ndarray
    i_power: int = 0

    def __post_init__(self):
        x = _bitvec(self.x)
        z = _bitvec(self.z, x.size)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "i_power", int(self.i_power) % 4)

    @property
    def n(self) -> int:
        return int(self.x.size)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8), 0)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        s = ["I"] * n
        s[qubit] = letter
        return cls.from_str("".join(s))

    @classmethod
    def from_str(cls, text: str) -> "PauliString":
        text = text.strip()
        body_start = 0
        while body_start < len(text) and text[body_start] in "+-i":
            body_start += 1
        prefix, body = text[:body_start], text[body_start:]
        if prefix not in _PREFIX_POWER:
            raise ValueError(f"bad Pauli prefix {prefix!r}")
        x, z = [], []
        n_y = 0
        for ch in body:
            if ch not in "IXYZ":
                raise ValueError(f"bad Pauli letter {ch!r} in {text!r}")
            x.append(1 if ch in "XY" else 0)
            z.append(1 if ch in "ZY" else 0)
            n_y += ch == "Y"
        return cls(np.array(x, np.uint8), np.array(z, np.uint8), _PREFIX_POWER[prefix] + n_y)

    def __str__(self):
        letters = "".join("IZXY"[2 * int(a) + int(b)] for a, b in zip(self.x, self.z))
        n_y = letters.count("Y")
        return _POWER_PREFIX[(self.i_power - n_y) % 4] + letters

    def __repr__(self):
        return f"PauliString({str(self)!r})"

    def __eq__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        return (
            self.i_power == other.i_power
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self):
        return hash((self.x.tobytes(), self.z.tobytes(), self.i_power))

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_multiply(self, other)

    def is_hermitian(self) -> bool:
        return self.i_power % 2 == int(np.dot(self.x.astype(np.int64), self.z)) % 2

    def commutes(self, other: "PauliString") -> bool:
        s = int(np.dot(self.x.astype(np.int64), other.z) + np.dot(self.z.astype(np.int64), other.x))
        return s % 2 == 0

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def is_diagonal(self) -> bool:
        return not self.x.any()

    def restrict(self, qubits: Sequence[int]) -> "PauliString":
        """Tensor factor on ``qubits`` (in the given order), without the global phase."""
        q = list(qubits)
        return PauliString(self.x[q], self.z[q], 0)

    def with_phase(self, i_power: int) -> "PauliString":
        return PauliString(self.x, self.z, i_power)

    def matrix(self) -> np.ndarray:
        xm = np.array([[0, 1], [1, 0]], dtype=complex)
        zm = np.array([[1, 0], [0, -1]], dtype=complex)
        out = np.ones((1, 1), dtype=complex)
        for a, b in zip(self.x, self.z):
            f = np.eye(2, dtype=complex)
            if a:
                f = f @ xm
            if b:
                f = f @ zm
            out = np.kron(out, f)
        return (1j ** self.i_power) * out

    def diagonal_value(self, bits) -> complex:
        """``<x|P|x>`` for a diagonal Pauli."""
        if not self.is_diagonal():
            return 0j
        s = int(np.dot(self.z.astype(np.int64), np.asarray(bits, dtype=np.int64))) % 2
        return (1j ** ((self.i_power + 2 * s) % 4))


def pauli_multiply(p: PauliString, q: PauliString) -> PauliString:
    if p.n != q.n:
        raise ValueError(f"Pauli length mismatch: {p.n} vs {q.n}")
    swap = int(np.dot(p.z.astype(np.int64), q.x))
    return PauliString(p.x ^ q.x, p.z ^ q.z, p.i_power + q.i_power + 2 * swap)


def pauli_decompose_xz(p: PauliString) -> tuple:
    """Split ``p = p_x * p_z`` with ``p_x`` a +1-signed X-type string."""
    zeros = np.zeros(p.n, np.uint8)
    return PauliString(p.x, zeros, 0), PauliString(zeros, p.z, p.i_power)


@dataclass(frozen=True, eq=False)
class PhasePolynomial:
    """``phi(x) = sum_S c_S * prod_{j in S} x_j`` with dyadic coefficients, mod 2*pi."""

    n_vars: int
    terms: Mapping = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for mono, ph in dict(self.terms).items():
            key = tuple(sorted(set(int(v) for v in mono)))
            if any(v < 0 or v >= self.n_vars for v in key):
                raise ValueError(f"monomial {key} out of range for {self.n_vars} variables")
            if not isinstance(ph, DyadicPhase):
                ph = DyadicPhase.from_fraction(ph)
            acc = clean.get(key, DyadicPhase()) + ph
            clean[key] = acc
        object.__setattr__(self, "terms", {k: v for k, v in clean.items() if not v.is_zero()})

    def evaluate(self, bits) -> DyadicPhase:
        acc = DyadicPhase()
        for mono, ph in self.terms.items():
            if all(bits[v] for v in mono):
                acc = acc + ph
        return acc

    def table(self) -> list:
        return [self.evaluate(index_to_bits(i, self.n_vars)) for i in range(1 << self.n_vars)]

    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def __add__(self, other: "PhasePolynomial") -> "PhasePolynomial":
        n = max(self.n_vars, other.n_vars)
        merged = dict(self.terms)
        for k, v in other.terms.items():
            merged[k] = merged.get(k, DyadicPhase()) + v
        return PhasePolynomial(n, merged)

    def __eq__(self, other):
        if not isinstance(other, PhasePolynomial):
            return NotImplemented
        return self.n_vars == other.n_vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.n_vars, tuple(sorted(self.terms.items(), key=lambda kv: kv[0]))))


def _common_numerators(table: Sequence[DyadicPhase]) -> tuple:
    m = max((p.denom_log2 for p in table), default=0)
    return [p.numerator << (m - p.denom_log2) for p in table], m


def _check_table(table) -> int:
    size = len(table)
    if size == 0 or size & (size - 1):
        raise ValueError(f"table length {size} is not a power of two")
    k = size.bit_length() - 1
    if k > MAX_TABLE_VARS:
        raise ValueError(f"tables over more than {MAX_TABLE_VARS} variables are refused")
    return k


def phase_table_to_polynomial(table: Sequence[DyadicPhase]) -> PhasePolynomial:
    """Moebius inversion of a diagonal phase table into AND-monomials."""
    k = _check_table(table)
    table = [p if isinstance(p, DyadicPhase) else DyadicPhase.from_fraction(p) for p in table]
    nums, m = _common_numerators(table)
    coef = np.array(nums, dtype=object)
    # subset-sum inversion, one variable at a time; index bit (k-1-j) is variable j
    for j in range(k):
        bit = 1 << (k - 1 - j)
        for idx in range(1 << k):
            if idx & bit:
                coef[idx] = coef[idx] - coef[idx ^ bit]
    terms = {}
    for idx in range(1 << k):
        ph = DyadicPhase(int(coef[idx]), m)
        if not ph.is_zero():
            terms[tuple(j for j in range(k) if idx >> (k - 1 - j) & 1)] = ph
    return PhasePolynomial(k, terms)


def parity_rotation_angles(angles: Sequence) -> dict:
    """Angles of the parity rotations that realize a diagonal gate.

    ``angles[x]`` is the phase (a rational multiple of pi, taken literally, not
    mod 2) the gate puts on basis state ``x``.  Returns ``{y: a_y}`` for every
    nonzero ``y`` so that ``sum_y a_y * (x.y mod 2) == angles[x] - angles[0]``
    for all ``x``; ``a_y = -(1/2**(k-1)) * sum_x (-1)**(x.y) * angles[x]``.
    """
    k = _check_table(angles)
    vals = [Fraction(a) for a in angles]
    out = {}
    for y in range(1, 1 << k):
        s = Fraction(0)
        for x, v in enumerate(vals):
            s += -v if bin(x & y).count("1") % 2 else v
        out[y] = -s / (1 << (k - 1))
    return out


def hierarchy_level(poly: PhasePolynomial) -> int:
    """Smallest ``l`` with ``degree + denom_log2 <= l`` for every monomial (identity -> 1)."""
    level = 1
    for mono, ph in poly.terms.items():
        level = max(level, len(mono) + ph.denom_log2)
    return level
