"""Gate-list circuit IR, classification, layering and the JSON interchange format."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import (
    DyadicPhase,
    PhasePolynomial,
    hierarchy_level,
    phase_table_to_polynomial,
)

NON_DIAGONAL_CLIFFORD = {"H", "X", "Y", "CNOT", "SWAP"}
CLIFFORD_DIAGONAL = {"I": 1, "Z": 1, "S": 1, "SDG": 1, "CZ": 2}
# all-ones phase of named diagonal gates, in units of pi, before the power
NAMED_DIAGONAL = {"T": (Fraction(1, 4), 1), "S": (Fraction(1, 2), 1), "SDG": (Fraction(-1, 2), 1),
                  "Z": (Fraction(1), 1), "CS": (Fraction(1, 2), 2), "CZ": (Fraction(1), 2),
                  "CCZ": (Fraction(1), 3), "CCCZ": (Fraction(1), 4), "MCZ": (Fraction(1), None),
                  "I": (Fraction(0), 1)}
ALIASES = {"CX": "CNOT", "S†": "SDG", "SDAG": "SDG", "TDG": "T", "ID": "I"}
ARITY = {"H": 1, "X": 1, "Y": 1, "CNOT": 2, "SWAP": 2}

# name -> (function bits[m, k] -> angles[m], declared cost)
ORACLE_REGISTRY: dict = {}


def register_oracle(name: str, fn: Callable, cost: str = "O(n)"):
    """Make a black-box diagonal available to ``ORACLE`` gates by name."""
    ORACLE_REGISTRY[name] = (fn, cost)


class CircuitFormatError(ValueError):
    def __init__(self, msg, line=None, col=None):
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(msg + where)
        self.line, self.col = line, col


def _idx_bits(idx: int, k: int):
    return [(idx >> (k - 1 - j)) & 1 for j in range(k)]


@dataclass(frozen=True)
class Gate:
    """One gate.  ``table`` and ``perm`` use the big-endian local index of ``qubits``.

    Generic diagonals are ``DIAG`` (``table``), permutations ``PERM`` (``perm``),
    almost-classical gates ``AC`` (``|x> -> exp(i table[x]) |perm[x]>``) and
    black-box diagonals ``ORACLE`` (``oracle`` names a registered function).
    """

    name: str
    qubits: tuple
    power: Fraction = Fraction(1)
    table: tuple | None = None
    perm: tuple | None = None
    oracle: str | None = None

    def __post_init__(self):
        name = ALIASES.get(self.name.upper() if self.name != "S†" else self.name, self.name.upper())
        power = Fraction(self.power)
        if self.name.upper() == "TDG":
            power = -power
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "power", power)
        k = len(self.qubits)
        if len(set(self.qubits)) != k:
            raise ValueError(f"repeated qubit in {name}{self.qubits}")
        if name in ARITY:
            if k != ARITY[name]:
                raise ValueError(f"{name} acts on {ARITY[name]} qubit(s)")
            if power != 1:
                raise ValueError(f"{name} does not take a power")
        elif name in NAMED_DIAGONAL:
            want = NAMED_DIAGONAL[name][1]
            if (want is not None and k != want) or k == 0:
                raise ValueError(f"{name} acts on {want} qubit(s), got {k}")
            den = power.denominator
            if den & (den - 1):
                raise ValueError("gate powers must be dyadic")
        elif name == "DIAG":
            if self.table is None or len(self.table) != 1 << k:
                raise ValueError("DIAG needs a phase table of length 2^|q|")
            object.__setattr__(self, "table", tuple(self.table))
        elif name in ("PERM", "AC"):
            if self.perm is None or sorted(self.perm) != list(range(1 << k)):
                raise ValueError(f"{name} needs a bijection on 2^|q| = {1 << k} points")
            object.__setattr__(self, "perm", tuple(int(v) for v in self.perm))
            if name == "AC":
                if self.table is None or len(self.table) != 1 << k:
                    raise ValueError("AC needs a phase table of length 2^|q|")
                object.__setattr__(self, "table", tuple(self.table))
        elif name == "ORACLE":
            if not self.oracle:
                raise ValueError("ORACLE gate needs an oracle name")
        else:
            raise ValueError(f"unknown gate kind {self.name!r}")

    @property
    def k(self) -> int:
        return len(self.qubits)

    @property
    def is_diagonal(self) -> bool:
        return self.name in NAMED_DIAGONAL or self.name in ("DIAG", "ORACLE")

    @property
    def is_almost_classical(self) -> bool:
        return self.name != "H"

    def phase_table(self) -> tuple:
        """Diagonal phases (``DyadicPhase``) for non-oracle almost-classical gates."""
        return _phase_table(self)

    def permutation(self) -> tuple:
        return _permutation(self)

    def action(self, idx: int):
        """``(image_index, phase)`` of local basis index ``idx``."""
        if not self.is_almost_classical:
            raise ValueError(f"{self.name} is not almost classical")
        if self.name == "ORACLE":
            raise ValueError("black-box oracle phases are not dyadic")
        return _permutation(self)[idx], _phase_table(self)[idx]

    def oracle_angles(self, bits) -> np.ndarray:
        """Real angles on rows of local bits (any diagonal gate, including oracles)."""
        bits = np.atleast_2d(np.asarray(bits, np.int64))
        if self.name == "ORACLE":
            if self.oracle not in ORACLE_REGISTRY:
                raise KeyError(f"unregistered oracle {self.oracle!r}")
            return float(self.power) * np.asarray(ORACLE_REGISTRY[self.oracle][0](bits), float)
        if not self.is_diagonal:
            raise ValueError(f"{self.name} is not diagonal")
        w = 1 << (self.k - 1 - np.arange(self.k))
        ang = np.array([p.angle for p in _phase_table(self)])
        return ang[bits @ w]

    def polynomial(self) -> PhasePolynomial:
        if not self.is_diagonal or self.name == "ORACLE":
            raise ValueError(f"{self.name} has no phase polynomial")
        return _polynomial(self)

    def level(self) -> int | None:
        """Clifford-hierarchy level of a diagonal gate (``None`` for oracles)."""
        if self.name == "ORACLE":
            return None
        return hierarchy_level(self.polynomial())

    def is_clifford(self) -> bool:
        return _is_clifford(self)

    def is_magic(self) -> bool:
        if self.name == "ORACLE":
            return True
        return self.is_diagonal and self.level() >= 3

    def is_identity(self) -> bool:
        if self.name == "I":
            return True
        if self.name == "ORACLE" or self.name == "H":
            return False
        return all(p.is_zero() for p in _phase_table(self)) and _permutation(self) == tuple(range(1 << self.k))

    def inverse(self) -> "Gate":
        if self.name in ("H", "X", "Y", "CNOT", "SWAP", "I"):
            return self
        if self.name == "S" and self.power == 1:
            return Gate("SDG", self.qubits)
        if self.name == "SDG" and self.power == 1:
            return Gate("S", self.qubits)
        if self.name in NAMED_DIAGONAL or self.name == "ORACLE":
            return Gate(self.name, self.qubits, -self.power, oracle=self.oracle)
        if self.name == "DIAG":
            return Gate("DIAG", self.qubits, table=tuple(-p for p in self.table))
        inv = [0] * len(self.perm)
        for x, y in enumerate(self.perm):
            inv[y] = x
        if self.name == "PERM":
            return Gate("PERM", self.qubits, perm=tuple(inv))
        return Gate("AC", self.qubits, perm=tuple(inv), table=tuple(-self.table[inv[y]] for y in range(len(inv))))

    def remap(self, mapping) -> "Gate":
        return Gate(self.name, tuple(mapping[q] for q in self.qubits), self.power, self.table, self.perm, self.oracle)

    def matrix(self) -> np.ndarray:
        """Dense local unitary (oracle gates use the registry)."""
        if self.name == "H":
            return np.array([[1, 1], [1, -1]], complex) / np.sqrt(2)
        dim = 1 << self.k
        if self.name == "ORACLE":
            return np.diag(np.exp(1j * self.oracle_angles(_all_bits(self.k))))
        m = np.zeros((dim, dim), complex)
        perm, tab = _permutation(self), _phase_table(self)
        for x in range(dim):
            m[perm[x], x] = tab[x].to_complex()
        return m

    def __str__(self):
        extra = "" if self.power == 1 else f"^{self.power}"
        return f"{self.name}{extra}{list(self.qubits)}"


def _all_bits(k: int) -> np.ndarray:
    idx = np.arange(1 << k)
    return ((idx[:, None] >> (k - 1 - np.arange(k))[None, :]) & 1).astype(np.int64)


@lru_cache(maxsize=4096)
def _phase_table(g: Gate) -> tuple:
    dim = 1 << g.k
    zero = DyadicPhase()
    if g.name in ("DIAG", "AC"):
        return g.table
    if g.name == "Y":
        return (DyadicPhase(1, 1), DyadicPhase(3, 1))
    if g.name in NAMED_DIAGONAL:
        ones = DyadicPhase.from_fraction(NAMED_DIAGONAL[g.name][0] * g.power)
        return tuple([zero] * (dim - 1) + [ones])
    if g.name in ("X", "CNOT", "SWAP", "PERM"):
        return tuple([zero] * dim)
    raise ValueError(f"{g.name} has no phase table")


@lru_cache(maxsize=4096)
def _permutation(g: Gate) -> tuple:
    dim = 1 << g.k
    if g.name in ("PERM", "AC"):
        return g.perm
    if g.name in ("X", "Y"):
        return (1, 0)
    if g.name == "CNOT":
        return (0, 1, 3, 2)
    if g.name == "SWAP":
        return (0, 2, 1, 3)
    if g.name == "H":
        raise ValueError("H is not a permutation")
    return tuple(range(dim))


@lru_cache(maxsize=4096)
def _polynomial(g: Gate) -> PhasePolynomial:
    return phase_table_to_polynomial(list(_phase_table(g)))


def affine_map(perm: Sequence[int], k: int):
    """``(M, c)`` with ``f(x) = M x + c`` over local bits, or ``None``."""
    c = np.array(_idx_bits(perm[0], k), np.uint8)
    M = np.zeros((k, k), np.uint8)
    for i in range(k):
        M[:, i] = np.array(_idx_bits(perm[1 << (k - 1 - i)], k), np.uint8) ^ c
    bits = _all_bits(k)
    img = ((bits @ M.T.astype(np.int64)) & 1) ^ c
    w = 1 << (k - 1 - np.arange(k))
    if not np.array_equal(img @ w, np.asarray(perm)):
        return None
    return M, c


@lru_cache(maxsize=4096)
def _is_clifford(g: Gate) -> bool:
    if g.name in ("H", "X", "Y", "CNOT", "SWAP", "I"):
        return True
    if g.name == "ORACLE":
        return False
    if g.name in ("PERM", "AC") and affine_map(g.perm, g.k) is None:
        return False
    return hierarchy_level(_polynomial(g)) <= 2


def synth_affine_permutation(perm, qubits) -> list:
    """CNOT/SWAP/X word realizing an affine permutation on ``qubits``."""
    k = len(qubits)
    res = affine_map(perm, k)
    if res is None:
        raise ValueError("permutation is not affine")
    M, c = res
    M = M.copy()
    ops = []
    for j in range(k):
        rows = np.flatnonzero(M[j:, j]) + j
        p = int(rows[0])
        if p != j:
            M[[j, p]] = M[[p, j]]
            ops.append(("SWAP", (j, p)))
        for i in np.flatnonzero(M[:, j]):
            if i != j:
                M[i] ^= M[j]
                ops.append(("CNOT", (j, int(i))))
    word = [(name, tuple(qubits[a] for a in loc)) for name, loc in reversed(ops)]
    word += [("X", (qubits[i],)) for i in np.flatnonzero(c)]
    return word


def clifford_word(gates: Iterable[Gate]):
    """``(word, global_phase)`` over {H,S,SDG,X,Y,Z,CNOT,CZ,SWAP} for Clifford gates."""
    word, phase = [], DyadicPhase()
    for g in gates:
        if g.name in ("H", "X", "Y", "CNOT", "SWAP"):
            word.append((g.name, g.qubits))
            continue
        if g.name == "I":
            continue
        if not g.is_clifford():
            raise ValueError(f"{g} is not Clifford")
        if g.name in ("PERM", "AC"):
            if g.name == "AC":
                w, ph = clifford_word([Gate("DIAG", g.qubits, table=g.table)])
                word += w
                phase = phase + ph
            word += synth_affine_permutation(g.perm, g.qubits)
            continue
        if g.name in ("S", "SDG", "Z", "CZ") and g.power == 1:
            word.append((g.name, g.qubits))
            continue
        for mono, ph in _polynomial(g).terms.items():
            a = ph.as_fraction()
            if len(mono) == 0:
                phase = phase + ph
            elif len(mono) == 1:
                q = (g.qubits[mono[0]],)
                word += {Fraction(1, 2): [("S", q)], Fraction(1): [("Z", q)], Fraction(3, 2): [("SDG", q)]}[a]
            else:
                word.append(("CZ", tuple(g.qubits[m] for m in mono)))
    return word, phase


@dataclass
class Circuit:
    n: int
    gates: list = field(default_factory=list)
    ancilla: tuple = ()

    def __post_init__(self):
        self.gates = list(self.gates)
        self.ancilla = tuple(int(a) for a in self.ancilla)
        for a in self.ancilla:
            if not 0 <= a < self.n:
                raise ValueError(f"ancilla index {a} out of range")
        if len(set(self.ancilla)) != len(self.ancilla):
            raise ValueError("repeated ancilla index")
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate):
        for q in g.qubits:
            if not 0 <= q < self.n:
                raise ValueError(f"qubit index {q} out of range for n={self.n} in {g}")

    @property
    def data_qubits(self) -> tuple:
        anc = set(self.ancilla)
        return tuple(q for q in range(self.n) if q not in anc)

    def append(self, name, qubits, **kw) -> "Circuit":
        g = name if isinstance(name, Gate) else Gate(name, tuple(qubits), **kw)
        self._check(g)
        self.gates.append(g)
        return self

    def extend(self, gates) -> "Circuit":
        for g in gates:
            self.append(g)
        return self

    def copy(self) -> "Circuit":
        return Circuit(self.n, list(self.gates), self.ancilla)

    def inverse(self) -> "Circuit":
        return Circuit(self.n, [g.inverse() for g in reversed(self.gates)], self.ancilla)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        return Circuit(self.n, self.gates + other.gates, tuple(sorted(set(self.ancilla) | set(other.ancilla))))

    def __len__(self):
        return len(self.gates)

    def is_clifford(self) -> bool:
        return all(g.is_clifford() for g in self.gates)

    def count(self, pred) -> int:
        return sum(1 for g in self.gates if pred(g))

    def magic_depth(self) -> int:
        return layered_form(self).d


# --- JSON -------------------------------------------------------------------

def _power_fields(p: Fraction) -> dict:
    den = p.denominator
    return {"pow_num": p.numerator, "pow_den_log2": den.bit_length() - 1}


def _phases_field(table) -> dict:
    m = max((p.denom_log2 for p in table), default=0)
    return {"denom_log2": m, "num": [p.numerator << (m - p.denom_log2) for p in table]}


def gate_to_dict(g: Gate) -> dict:
    d = {"g": g.name, "q": list(g.qubits)}
    if g.power != 1:
        d.update(_power_fields(g.power))
    if g.table is not None:
        d["phases"] = _phases_field(g.table)
    if g.perm is not None:
        d["perm"] = list(g.perm)
    if g.oracle is not None:
        d["oracle"] = g.oracle
    return d


def gate_from_dict(d: dict) -> Gate:
    if not isinstance(d, dict) or "g" not in d or "q" not in d:
        raise ValueError("gate objects need 'g' and 'q'")
    known = {"g", "q", "pow_num", "pow_den_log2", "phases", "perm", "oracle"}
    extra = set(d) - known
    if extra:
        raise ValueError(f"unknown gate field(s) {sorted(extra)}")
    q = d["q"]
    if not isinstance(q, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in q):
        raise ValueError("'q' must be a list of integers")
    power = Fraction(1)
    if "pow_num" in d or "pow_den_log2" in d:
        num, m = d.get("pow_num", 1), d.get("pow_den_log2", 0)
        if not isinstance(num, int) or not isinstance(m, int) or m < 0:
            raise ValueError("pow_num/pow_den_log2 must be integers, pow_den_log2 >= 0")
        power = Fraction(num, 1 << m)
    table = None
    if "phases" in d:
        ph = d["phases"]
        if not isinstance(ph, dict) or "num" not in ph:
            raise ValueError("'phases' must be {'denom_log2': m, 'num': [...]}")
        m = ph.get("denom_log2", 0)
        table = tuple(DyadicPhase(int(v), int(m)) for v in ph["num"])
    return Gate(str(d["g"]), tuple(q), power, table, d.get("perm"), d.get("oracle"))


def circuit_to_dict(c: Circuit) -> dict:
    return {"n": c.n, "ancilla": list(c.ancilla), "gates": [gate_to_dict(g) for g in c.gates]}


def serialize_circuit(c: Circuit) -> str:
    """Canonical text: one gate object per line."""
    lines = [json.dumps(gate_to_dict(g), separators=(", ", ": ")) for g in c.gates]
    body = ",\n  ".join(lines)
    gates = f"[\n  {body}\n]" if lines else "[]"
    return f'{{"n": {c.n}, "ancilla": {json.dumps(list(c.ancilla))}, "gates": {gates}}}\n'


def _gate_position(text: str, index: int):
    # best-effort location of the index-th gate object for error messages
    pos = text.find('"gates"')
    depth = 0
    count = -1
    for i in range(max(pos, 0), len(text)):
        ch = text[i]
        if ch == "{":
            depth += 1
            if depth == 1:
                count += 1
                if count == index:
                    line = text.count("\n", 0, i) + 1
                    col = i - (text.rfind("\n", 0, i) + 1) + 1
                    return line, col
        elif ch == "}":
            depth -= 1
    return None, None


def parse_circuit(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CircuitFormatError(f"syntax error: {e.msg}", e.lineno, e.colno) from None
    if not isinstance(doc, dict) or "n" not in doc or "gates" not in doc:
        raise CircuitFormatError("document must be an object with 'n' and 'gates'", 1, 1)
    n = doc["n"]
    if not isinstance(n, int) or n < 0:
        raise CircuitFormatError("'n' must be a non-negative integer", 1, 1)
    if not isinstance(doc["gates"], list):
        raise CircuitFormatError("'gates' must be a list", 1, 1)
    gates = []
    for i, gd in enumerate(doc["gates"]):
        try:
            g = gate_from_dict(gd)
            for q in g.qubits:
                if not 0 <= q < n:
                    raise ValueError(f"qubit index {q} out of range for n={n}")
        except (ValueError, TypeError) as e:
            line, col = _gate_position(text, i)
            raise CircuitFormatError(f"gate {i}: {e}", line, col) from None
        gates.append(g)
    try:
        return Circuit(n, gates, tuple(doc.get("ancilla", ())))
    except ValueError as e:
        raise CircuitFormatError(str(e), 1, 1) from None


def load_circuit(path) -> Circuit:
    with open(path) as fh:
        return parse_circuit(fh.read())


def save_circuit(c: Circuit, path):
    with open(path, "w") as fh:
        fh.write(serialize_circuit(c))


# --- almost-classical gates -----------------------------------------------------

def is_almost_classical(g: Gate) -> bool:
    return g.is_almost_classical


def _lift(g: Gate, support: Sequence[int]):
    """Permutation and phase table of ``g`` on the larger register ``support``."""
    k = len(support)
    pos = [support.index(q) for q in g.qubits]
    perm = np.zeros(1 << k, np.int64)
    table = []
    for x in range(1 << k):
        bits = _idx_bits(x, k)
        loc = 0
        for p in pos:
            loc = (loc << 1) | bits[p]
        y, ph = g.action(loc)
        ybits = _idx_bits(y, g.k)
        for j, p in enumerate(pos):
            bits[p] = ybits[j]
        out = 0
        for b in bits:
            out = (out << 1) | b
        perm[x] = out
        table.append(ph)
    return perm, table


def compose_almost_classical(a: Gate, b: Gate) -> Gate:
    """The gate ``b`` after ``a``: ``x -> f_b(f_a(x))`` with phase ``phi_a(x) + phi_b(f_a(x))``."""
    if not (a.is_almost_classical and b.is_almost_classical):
        raise ValueError("both gates must be almost classical")
    support = sorted(set(a.qubits) | set(b.qubits))
    pa, ta = _lift(a, support)
    pb, tb = _lift(b, support)
    perm = tuple(int(pb[pa[x]]) for x in range(len(pa)))
    table = tuple(ta[x] + tb[int(pa[x])] for x in range(len(pa)))
    return Gate("AC", tuple(support), perm=perm, table=table)


def propagate_basis(c: Circuit, x) -> tuple:
    """Image bitstring and accumulated phase of ``|x>`` under an almost-classical circuit."""
    bits = [int(v) & 1 for v in x]
    if len(bits) != c.n:
        raise ValueError(f"expected {c.n} bits")
    phase = DyadicPhase()
    for g in c.gates:
        if not g.is_almost_classical:
            raise ValueError(f"{g} is not almost classical")
        loc = 0
        for q in g.qubits:
            loc = (loc << 1) | bits[q]
        y, ph = g.action(loc)
        phase = phase + ph
        for j, q in enumerate(g.qubits):
            bits[q] = (y >> (g.k - 1 - j)) & 1
    return tuple(bits), phase


def basis_action_table(c: Circuit, qubits: Sequence[int] | None = None):
    """``{x: (image, phase)}`` over all inputs on ``qubits`` (others held at 0)."""
    qubits = list(range(c.n)) if qubits is None else list(qubits)
    out = {}
    for idx in range(1 << len(qubits)):
        x = [0] * c.n
        for j, q in enumerate(qubits):
            x[q] = (idx >> (len(qubits) - 1 - j)) & 1
        out[tuple(x[q] for q in qubits)] = propagate_basis(c, x)
    return out


# --- layering -----------------------------------------------------------------------

@dataclass
class Layer:
    clifford: list
    magic: list


@dataclass
class LayeredForm:
    n: int
    layers: list
    tail: list

    @property
    def d(self) -> int:
        return len(self.layers)

    def to_circuit(self, ancilla=()) -> Circuit:
        gates = []
        for lay in self.layers:
            gates += lay.clifford + lay.magic
        return Circuit(self.n, gates + self.tail, ancilla)


def _expand(g: Gate) -> list:
    if g.name == "AC" and not g.is_clifford():
        return [Gate("DIAG", g.qubits, table=g.table), Gate("PERM", g.qubits, perm=g.perm)]
    return [g]


def layered_form(c: Circuit) -> LayeredForm:
    """Greedy left-to-right split into Clifford blocks and diagonal magic blocks.

    A magic gate joins the most recent magic block when every non-diagonal
    gate issued since that block is disjoint from it; diagonal gates commute.
    """
    layers: list = []
    buf: list = []
    for g0 in c.gates:
        for g in _expand(g0):
            if g.is_identity():
                continue
            if g.is_magic():
                if layers and all(h.is_diagonal or not set(h.qubits) & set(g.qubits) for h in buf):
                    layers[-1].magic.append(g)
                else:
                    layers.append(Layer(buf, [g]))
                    buf = []
            elif g.is_clifford():
                buf.append(g)
            else:
                raise ValueError(f"cannot classify {g}: not Clifford and not diagonal")
    return LayeredForm(c.n, layers, buf)


# --- degree-three IQP descriptions ------------------------------------------------

@dataclass(frozen=True)
class IQP3:
    """``D = (-1)^{f(x)}`` with ``f`` a sum of monomials of degree <= 3 (Z / CZ / CCZ)."""

    n: int
    terms: tuple = ()

    def __post_init__(self):
        terms = []
        for t in self.terms:
            t = tuple(sorted(int(q) for q in t))
            if len(set(t)) != len(t):
                raise ValueError(f"repeated variable in term {t}")
            if len(t) > 3:
                raise ValueError(f"term degree > 3: {t}")
            if any(not 0 <= q < self.n for q in t):
                raise ValueError(f"term {t} out of range for n={self.n}")
            terms.append(t)
        object.__setattr__(self, "terms", tuple(terms))

    @classmethod
    def coerce(cls, obj) -> "IQP3":
        if isinstance(obj, IQP3):
            return obj
        if isinstance(obj, Circuit):
            return cls.from_circuit(obj)
        if isinstance(obj, dict):
            return cls(int(obj["n"]), tuple(tuple(t) for t in obj.get("terms", ())))
        n, terms = obj
        return cls(int(n), tuple(tuple(t) for t in terms))

    @classmethod
    def from_circuit(cls, c: Circuit) -> "IQP3":
        """Diagonal Z/CZ/CCZ gates of ``c``; Hadamard gates are ignored."""
        terms = []
        for g in c.gates:
            if g.name == "H":
                continue
            if g.name in ("Z", "CZ", "CCZ") and g.power == 1:
                terms.append(g.qubits)
            else:
                raise ValueError(f"{g} is not a degree-three IQP term")
        return cls(c.n, tuple(terms))

    def to_dict(self) -> dict:
        return {"n": self.n, "terms": [list(t) for t in self.terms]}

    def diagonal_gates(self) -> list:
        out = []
        for t in self.terms:
            if not t:
                out.append(Gate("DIAG", (0,), table=(DyadicPhase(1), DyadicPhase(1))))
            else:
                out.append(Gate({1: "Z", 2: "CZ", 3: "CCZ"}[len(t)], t))
        return out

    def circuit(self) -> Circuit:
        hs = [Gate("H", (q,)) for q in range(self.n)]
        return Circuit(self.n, hs + self.diagonal_gates() + hs)

    def f(self, bits) -> np.ndarray:
        """``f`` on rows of bits (mod 2)."""
        bits = np.atleast_2d(np.asarray(bits, np.int64))
        out = np.zeros(bits.shape[0], np.int64)
        for t in self.terms:
            out ^= np.prod(bits[:, list(t)], axis=1) if t else 1
        return out
