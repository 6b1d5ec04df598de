"""Constructive compilation passes into shallow magic-depth normal forms."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .circuit import Circuit, Gate, IQP3, affine_map, layered_form
from .core import parity_rotation_angles


@dataclass
class PassReport:
    name: str
    ancilla_added: int = 0
    depth_before: int | None = None
    depth_after: int | None = None
    gate_counts: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pass": self.name,
            "ancilla_added": self.ancilla_added,
            "depth_before": self.depth_before,
            "depth_after": self.depth_after,
            "gate_counts": dict(sorted(self.gate_counts.items())),
            "notes": self.notes,
        }


def t_power(g: Gate):
    """``t`` with ``g = diag(1, exp(i*pi*t/4))`` for single-qubit phase gates, else ``None``."""
    if g.k != 1 or not g.is_diagonal or g.name == "ORACLE":
        return None
    tab = g.phase_table()
    if not tab[0].is_zero():
        return None
    t = (tab[1].as_fraction() * 4) % 8
    return t - 8 if t > 4 else t


def gate_label(g: Gate) -> str:
    t = t_power(g)
    if t is None:
        return g.name
    if t == 0:
        return "I"
    if t in (1, -1):
        return "T"
    if t in (2, -2):
        return "S"
    if t == 4:
        return "Z"
    return f"T^{Fraction(1, t.denominator)}"


def gate_counts(c: Circuit) -> dict:
    counts = Counter(gate_label(g) for g in c.gates)
    counts["total"] = len(c.gates)
    counts["magic"] = sum(1 for g in c.gates if g.is_magic())
    return dict(counts)


def _depth(c: Circuit):
    try:
        return layered_form(c).d
    except ValueError:
        return None


def _report(name, before: Circuit | None, after: Circuit, ancilla: int, **notes) -> PassReport:
    return PassReport(
        name, ancilla, _depth(before) if before is not None else None, _depth(after),
        gate_counts(after), notes,
    )


def phase_gate(q: int, frac) -> Gate | None:
    """Single-qubit ``diag(1, exp(i*pi*frac))`` with a conventional name."""
    f = Fraction(frac) % 2
    if f == 0:
        return None
    if f == 1:
        return Gate("Z", (q,))
    if f == Fraction(1, 2):
        return Gate("S", (q,))
    if f == Fraction(3, 2):
        return Gate("SDG", (q,))
    t = 4 * f
    return Gate("T", (q,), t - 8 if t > 4 else t)


# --- parallelization --------------------------------------------------------------

def parallelize_diagonals(c: Circuit):
    """Copy each diagonal gate's support onto fresh ancillas and apply all gates at once."""
    for g in c.gates:
        if not g.is_diagonal:
            raise ValueError(f"parallelize_diagonals: {g} is not diagonal")
    n = c.n
    copy, layer = [], []
    for g in c.gates:
        anc = tuple(range(n, n + g.k))
        n += g.k
        copy += [Gate("CNOT", (q, a)) for q, a in zip(g.qubits, anc)]
        layer.append(g.remap(dict(zip(g.qubits, anc))))
    added = n - c.n
    out = Circuit(n, copy + layer + copy[::-1], c.ancilla + tuple(range(c.n, n)))
    return out, _report("parallelize", c, out, added, layer_width=len(layer))


# --- almost-classical one-layer compilation ----------------------------------

def d_power(g: Gate, d: Gate):
    """Integer ``m`` with ``g == d**m`` as diagonal tables (same arity), else ``None``."""
    if not (g.is_diagonal and d.is_diagonal) or g.k != d.k or "ORACLE" in (g.name, d.name):
        return None
    gt, dt = g.phase_table(), d.phase_table()
    order = 1 << (max(p.denom_log2 for p in dt) + 1)
    for m in range(1, order):
        if all(a == b * m for a, b in zip(gt, dt)):
            return m
    return None


class _Wires:
    """Each wire's value as an affine GF(2) function of the inputs, or ``None``."""

    def __init__(self, n):
        self.val = [(1 << q, 0) for q in range(n)]

    def update(self, g: Gate):
        if g.is_diagonal:
            return
        qs = g.qubits
        if g.name in ("X", "Y"):
            v = self.val[qs[0]]
            self.val[qs[0]] = None if v is None else (v[0], v[1] ^ 1)
            return
        if g.name == "CNOT":
            a, b = self.val[qs[0]], self.val[qs[1]]
            self.val[qs[1]] = None if a is None or b is None else (a[0] ^ b[0], a[1] ^ b[1])
            return
        if g.name == "SWAP":
            self.val[qs[0]], self.val[qs[1]] = self.val[qs[1]], self.val[qs[0]]
            return
        res = affine_map(g.permutation(), g.k)
        old = [self.val[q] for q in qs]
        for i, q in enumerate(qs):
            if res is None or any(v is None for v in old):
                self.val[q] = None
                continue
            M, c = res
            mask, const = 0, int(c[i])
            for j in range(g.k):
                if M[i, j]:
                    mask ^= old[j][0]
                    const ^= old[j][1]
            self.val[q] = (mask, const)

    def raw_input(self, q):
        """Input wire whose initial value equals wire ``q`` now, if any."""
        v = self.val[q]
        if v is None or v[1] or v[0] == 0 or v[0] & (v[0] - 1):
            return None
        return v[0].bit_length() - 1


def _one_layer(gates, n: int, d_gate: Gate, reuse_wires: bool = True):
    """Split an almost-classical gate list into ``A2`` then ``A1`` (one D layer).

    Returns ``(gates, n_out, center_width)``.
    """
    a2, opens, center, closes = [], [], [], []
    wires = _Wires(n)
    used = set()
    n_out = n
    for g in gates:
        if not g.is_almost_classical:
            raise ValueError(f"{g} is not almost classical; the one-layer construction needs "
                             "permutation/diagonal gates only")
        if d_power(g, d_gate) is None:
            a2.append(g)
            opens.insert(0, g.inverse())
            closes.append(g)
            wires.update(g)
            continue
        targets = [wires.raw_input(q) for q in g.qubits] if reuse_wires else [None] * g.k
        if all(t is not None for t in targets) and len(set(targets)) == g.k and not used & set(targets):
            used |= set(targets)
            center.append(g.remap(dict(zip(g.qubits, targets))))
            continue
        anc = tuple(range(n_out, n_out + g.k))
        n_out += g.k
        cp = [Gate("CNOT", (q, a)) for q, a in zip(g.qubits, anc)]
        opens[:0] = cp
        closes.extend(cp)
        center.append(g.remap(dict(zip(g.qubits, anc))))
    # A2 followed by the first opens cancels gate by gate at the tail
    while a2 and opens and opens[0] == a2[-1].inverse():
        a2.pop()
        opens.pop(0)
    return a2 + opens + center + closes, n_out, len(center)


def compile_d_to_one_layer(c: Circuit, d_gate: Gate, reuse_wires: bool = True):
    """Put every power of the diagonal ``d_gate`` into a single layer (ancilla start and end in |0>)."""
    if not d_gate.is_diagonal:
        raise ValueError("designated gate must be diagonal")
    gates, n_out, width = _one_layer(c.gates, c.n, d_gate, reuse_wires)
    out = Circuit(n_out, gates, c.ancilla + tuple(range(c.n, n_out)))
    return out, _report("d-one-layer", c, out, n_out - c.n, d_layer_width=width, d_gate=str(d_gate))


# --- CCZ and parity-rotation synthesis ------------------------------------------

def ccz_network(a: int, b: int, c: int) -> list:
    """Ancilla-free CNOT + T^{+-1} network for CCZ on ``(a, b, c)``."""
    T = lambda q, p=1: Gate("T", (q,), p)  # noqa: E731
    return [
        T(a), T(b), T(c),
        Gate("CNOT", (a, b)), T(b, -1),
        Gate("CNOT", (a, c)), T(c, -1),
        Gate("CNOT", (b, c)), T(c, -1),
        Gate("CNOT", (a, c)), T(c),
        Gate("CNOT", (b, c)), Gate("CNOT", (a, b)),
    ]


def decompose_ccz() -> Circuit:
    return Circuit(3, ccz_network(0, 1, 2))


def ckz_table(k: int, l: int) -> list:
    """Phase table (units of pi) of ``C^k Z^{2^{k-l+1}}`` on ``k+1`` qubits."""
    top = Fraction(2) ** (k - l + 1)
    return [Fraction(0)] * ((1 << (k + 1)) - 1) + [top]


def parity_network(qubits, angles) -> list:
    """CNOT + single-qubit rotation network realizing ``exp(i*pi*angles[x])`` up to its value at 0."""
    k = len(qubits)
    gates = []
    for y, a in sorted(parity_rotation_angles(angles).items()):
        rot = a % 2
        if rot == 0:
            continue
        sup = [qubits[j] for j in range(k) if y >> (k - 1 - j) & 1]
        tgt = sup[-1]
        cx = [Gate("CNOT", (q, tgt)) for q in sup[:-1]]
        gates += cx + [phase_gate(tgt, rot)] + cx[::-1]
    return gates


def _check_kl(k, l):
    if not (isinstance(k, int) and isinstance(l, int)) or k < 0 or l < 1 or k > l - 1 or l > 16:
        raise ValueError(f"need 0 <= k <= l-1 and 1 <= l <= 16, got k={k}, l={l}")


def synth_ckz_network(k: int, l: int, qubits=None) -> list:
    _check_kl(k, l)
    qubits = tuple(range(k + 1)) if qubits is None else tuple(qubits)
    return parity_network(qubits, ckz_table(k, l))


def synth_ckz_one_layer(k: int, l: int):
    """``C^k Z^{2^{k-l+1}}`` from CNOTs and one layer of ``Z^{+-2^{1-l}}`` rotations."""
    _check_kl(k, l)
    base = Circuit(k + 1, synth_ckz_network(k, l))
    d_gate = phase_gate(0, Fraction(1, 2 ** (l - 1)))
    out, rep = compile_d_to_one_layer(base, d_gate)
    rep.name = "ckz"
    rep.notes.update(k=k, l=l, rotations=sum(1 for g in base.gates if g.name != "CNOT"))
    return out, rep


def rotation_angles(c: Circuit) -> list:
    """Angles (units of pi) of all single-qubit phase rotations in ``c``."""
    out = []
    for g in c.gates:
        t = t_power(g)
        if t is not None:
            a = t / 4
            out.append(a - 2 if a > 1 else a)
    return out


# --- two-layer multi-controlled Z ---------------------------------------------------

def _mcz(qubits) -> Gate:
    qubits = tuple(qubits)
    return {1: lambda: Gate("Z", qubits), 2: lambda: Gate("CZ", qubits),
            3: lambda: Gate("CCZ", qubits), 4: lambda: Gate("CCCZ", qubits)}.get(
        len(qubits), lambda: Gate("MCZ", qubits))()


def _mcs(qubits) -> Gate:
    """``C^{m-1} S`` on ``m`` qubits: phase ``i`` on all-ones."""
    qubits = tuple(qubits)
    if len(qubits) == 1:
        return Gate("S", qubits)
    if len(qubits) == 2:
        return Gate("CS", qubits)
    return Gate("MCZ", qubits, Fraction(1, 2))


def sandwich_layers(a_bits, b_bits, anc):
    """``(layer1, middle, layer2)`` of the two-layer C^{m+m'-1}Z construction."""
    layer1 = [_mcz(tuple(a_bits) + (anc,)), _mcz(tuple(b_bits) + (anc,)), _mcs(a_bits), _mcs(b_bits)]
    middle = [Gate("H", (anc,)), Gate("SDG", (anc,)), Gate("H", (anc,))]
    layer2 = [_mcz(tuple(a_bits) + (anc,)), _mcz(tuple(b_bits) + (anc,))]
    return layer1, middle, layer2


def synth_clz_sandwich(m: int, m2: int):
    """``C^{m+m2-1} Z`` on ``m+m2`` data qubits plus one clean ancilla (last qubit)."""
    if m < 1 or m2 < 1:
        raise ValueError("m, m' must be >= 1")
    n = m + m2 + 1
    anc = n - 1
    a_bits, b_bits = tuple(range(m)), tuple(range(m, m + m2))
    l1, mid, l2 = sandwich_layers(a_bits, b_bits, anc)
    gates = [Gate("H", (anc,))] + l1 + mid + l2 + [Gate("H", (anc,))]
    out = Circuit(n, gates, (anc,))
    return out, _report("clz", None, out, 1, m=m, m_prime=m2, diagonal_layers=2)


# --- IQP3 and the Hadamard test ------------------------------------------------------

def lower_diagonals(gates, mode: str = "t") -> list:
    """Replace CCZ / CS / CCCZ / MCZ by CNOT + rotation networks."""
    out = []
    for g in gates:
        if g.name == "CCZ" and g.power == 1:
            out += ccz_network(*g.qubits)
        elif g.is_diagonal and g.name != "ORACLE" and g.is_magic():
            tab = [p.as_fraction() for p in g.phase_table()]
            out += parity_network(g.qubits, tab)
            if tab[0]:
                out.append(Gate("DIAG", g.qubits[:1], table=(g.phase_table()[0],) * 2))
        else:
            out.append(g)
    return out


def iqp3_to_tdepth1(iqp: IQP3):
    """``H^n D H^n`` with ``D``'s CCZ terms compiled into one layer of T^{+-1} gates."""
    iqp = IQP3.coerce(iqp)
    n = iqp.n
    diag = lower_diagonals(iqp.diagonal_gates())
    gates, n_out, width = _one_layer(diag, n, Gate("T", (0,)))
    hs = [Gate("H", (q,)) for q in range(n)]
    out = Circuit(n_out, hs + gates + hs, tuple(range(n, n_out)))
    before = iqp.circuit()
    return out, _report("iqp3-td1", before, out, n_out - n, terms=len(iqp.terms), t_layer_width=width)


def build_hadamard_test(iqp: IQP3):
    """``(circuit, Z_0)``: qubit 0 controls ``D`` acting on ``|+^n>`` held on qubits ``1..n``."""
    from .core import PauliString

    iqp = IQP3.coerce(iqp)
    n = iqp.n
    gates = [Gate("H", (0,))] + [Gate("H", (q + 1,)) for q in range(n)]
    for t in iqp.terms:
        gates.append(_mcz((0,) + tuple(q + 1 for q in t)))
    gates.append(Gate("H", (0,)))
    return Circuit(n + 1, gates, (0,)), PauliString.single(n + 1, 0, "Z")


def _split_diagonal_run(c: Circuit):
    gates = c.gates
    i = 0
    while i < len(gates) and not gates[i].is_diagonal:
        i += 1
    j = i
    while j < len(gates) and gates[j].is_diagonal:
        j += 1
    if any(g.is_diagonal and not g.is_identity() for g in gates[j:]):
        raise ValueError("expected a single run of diagonal gates (Hadamard-test shape)")
    return gates[:i], gates[i:j], gates[j:]


HTEST_MODES = ("thalf-depth1", "t-depth2")


def compile_hadamard_test(c: Circuit, mode: str):
    if mode not in HTEST_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {HTEST_MODES}")
    pre, diag, post = _split_diagonal_run(c)
    n = c.n
    if mode == "thalf-depth1":
        gates, n_out, width = _one_layer(lower_diagonals(diag), n, Gate("T", (0,), Fraction(1, 2)))
        out = Circuit(n_out, pre + gates + post, c.ancilla + tuple(range(n, n_out)))
        return out, _report("htest-compile", c, out, n_out - n, mode=mode, layer_widths=[width])
    layer1, layer2, opens, middle, closes = [], [], [], [], []
    n_out = n
    for g in diag:
        if len(g.qubits) >= 4 and g.power == 1 and g.name in ("CCCZ", "MCZ"):
            anc = n_out
            n_out += 1
            half = (len(g.qubits) + 1) // 2
            l1, mid, l2 = sandwich_layers(g.qubits[:half], g.qubits[half:], anc)
            layer1 += l1
            layer2 += l2
            middle += mid
            opens.append(Gate("H", (anc,)))
            closes.append(Gate("H", (anc,)))
        else:
            layer1.append(g)
    sandwich_anc = tuple(range(n, n_out))
    g1, n_out, w1 = _one_layer(lower_diagonals(layer1), n_out, Gate("T", (0,)))
    g2, n_out, w2 = _one_layer(lower_diagonals(layer2), n_out, Gate("T", (0,)))
    body = opens + g1 + middle + g2 + closes
    out = Circuit(n_out, pre + body + post, c.ancilla + tuple(range(n, n_out)))
    return out, _report("htest-compile", c, out, n_out - n, mode=mode, layer_widths=[w1, w2],
                        sandwich_ancilla=len(sandwich_anc))
