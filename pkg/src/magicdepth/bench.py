"""Timing helpers: numba vs numpy kernels, and size-scaling runs."""
from __future__ import annotations

import time
from contextlib import contextmanager

import numpy as np

from . import _accel
from .circuit import Circuit, Gate
from .core import PauliString
from .quadform import Z8Form
from .stabilizer import StabilizerTableau, canonicalize, inner_product, to_affine_form

_ONE = ("H", "S", "SDG", "X", "Z")
_TWO = ("CNOT", "CZ")


def random_clifford_word(n: int, n_gates: int, rng) -> list:
    word = []
    for _ in range(n_gates):
        if n > 1 and rng.random() < 0.5:
            a, b = rng.choice(n, 2, replace=False)
            word.append((_TWO[rng.integers(2)], (int(a), int(b))))
        else:
            word.append((_ONE[rng.integers(len(_ONE))], (int(rng.integers(n)),)))
    return word


def random_clifford_circuit(n: int, n_gates: int, rng) -> Circuit:
    return Circuit(n, [Gate(g, q) for g, q in random_clifford_word(n, n_gates, rng)])


def random_stabilizer_tableau(n: int, rng, layers: int = 4) -> StabilizerTableau:
    """Hadamard layer, then ``layers`` rounds of random CNOT/CZ/S over all qubits."""
    tab = StabilizerTableau.zero_state(n)
    for q in range(n):
        if rng.random() < 0.5:
            tab.apply_inplace("H", (q,))
    for _ in range(layers):
        perm = rng.permutation(n)
        for a, b in zip(perm[::2], perm[1::2]):
            tab.apply_inplace(_TWO[rng.integers(2)], (int(a), int(b)))
        for q in range(n):
            g = rng.integers(4)
            if g < 3:
                tab.apply_inplace(("H", "S", "SDG")[g], (q,))
    return tab


def _overlapping_pair(n: int, rng):
    """A random stabilizer state and a locally perturbed copy (nonzero overlap, full-size solve)."""
    a = to_affine_form(random_stabilizer_tableau(n, rng))
    # <a|S_0|a> has modulus 1 or 2^-1/2, never 0
    b = a.copy().apply("S", (0,))
    return a, b


def random_form(r: int, rng) -> Z8Form:
    L = 2 * rng.integers(0, 4, r)
    Q = np.triu(rng.integers(0, 2, (r, r)), 1).astype(np.uint8)
    return Z8Form(r, int(rng.integers(8)), L, Q | Q.T)


@contextmanager
def backend(name: str):
    """Temporarily select ``numba`` or ``numpy`` kernels."""
    if name == "numba" and not _accel.HAVE_NUMBA:
        raise RuntimeError("numba is unavailable (or disabled by MAGICDEPTH_DISABLE_NUMBA)")
    old = _accel.USE_NUMBA
    _accel.USE_NUMBA = name == "numba"
    try:
        yield
    finally:
        _accel.USE_NUMBA = old


def best_time(fn, repeats: int = 3, min_sample: float = 0.05) -> float:
    """Best per-call time over ``repeats`` samples; short calls are batched up to ``min_sample`` seconds."""
    t = time.perf_counter()
    fn()
    one = time.perf_counter() - t
    loops = max(1, int(min_sample / max(one, 1e-9)))
    best = float("inf")
    for _ in range(repeats):
        t = time.perf_counter()
        for _ in range(loops):
            fn()
        best = min(best, (time.perf_counter() - t) / loops)
    return best


def _workloads(n: int, rng):
    tab = random_stabilizer_tableau(n, rng)
    form = random_form(n, rng)
    a, b = _overlapping_pair(n, rng)
    return {
        "canonicalize": lambda: canonicalize(tab.copy()),
        "gauss_sum": lambda: form.gauss_sum(),
        "inner_product": lambda: inner_product(a, b),
    }


def compare_backends(sizes=(64, 128, 256), repeats: int = 3, seed: int = 0) -> list:
    """Rows ``{kernel, n, numba_s, numpy_s, speedup}``; numba is warmed up first."""
    rows = []
    backends = ["numba", "numpy"] if _accel.HAVE_NUMBA else ["numpy"]
    for n in sizes:
        work = _workloads(n, np.random.default_rng([seed, n]))
        for name, fn in work.items():
            row = {"kernel": name, "n": n}
            for be in backends:
                with backend(be):
                    fn()
                    row[f"{be}_s"] = best_time(fn, repeats)
            if "numba_s" in row:
                row["speedup"] = row["numpy_s"] / row["numba_s"]
            rows.append(row)
    return rows


def _exact_pauli_workload(n: int, rng):
    from .exact import exact_pauli_ch3

    u = random_clifford_word(n, 4 * n, rng)
    layer = [Gate("T", (q,)) for q in range(0, n, 2)] + [Gate("CCZ", (q, q + 1, q + 2)) for q in range(1, n - 2, 6)]
    layer = _disjoint(layer)
    letters = rng.choice(list("IXYZ"), n)
    p = PauliString.from_str("".join(letters))
    return lambda: exact_pauli_ch3(u, layer, p, return_complex=True)


def _disjoint(gates):
    used, out = set(), []
    for g in gates:
        if not used & set(g.qubits):
            used |= set(g.qubits)
            out.append(g)
    return out


def scaling(op: str = "inner-product", sizes=(64, 128, 256, 512), repeats: int = 3, seed: int = 0) -> list:
    """Rows ``{op, n, seconds, ratio}`` with ``ratio = t(n) / t(n_prev)``."""
    rows, prev = [], None
    for n in sizes:
        rng = np.random.default_rng([seed, n])
        if op == "inner-product":
            a, b = _overlapping_pair(n, rng)
            fn = lambda a=a, b=b: inner_product(a, b)  # noqa: E731
        elif op == "exact-pauli":
            fn = _exact_pauli_workload(n, rng)
        elif op == "canonicalize":
            tab = random_stabilizer_tableau(n, rng)
            fn = lambda tab=tab: canonicalize(tab.copy())  # noqa: E731
        else:
            raise ValueError(f"unknown scaling op {op!r}")
        fn()
        t = best_time(fn, repeats)
        rows.append({"op": op, "n": n, "seconds": t, "ratio": None if prev is None else t / prev})
        prev = t
    return rows


def format_table(rows) -> str:
    if not rows:
        return ""
    keys = list(rows[0])
    for r in rows[1:]:
        keys += [k for k in r if k not in keys]
    cells = [[_fmt(r.get(k)) for k in keys] for r in rows]
    widths = [max(len(k), *(len(c[i]) for c in cells)) for i, k in enumerate(keys)]
    lines = ["  ".join(k.ljust(w) for k, w in zip(keys, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def _fmt(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


if __name__ == "__main__":
    print(format_table(compare_backends()))
