"""Command-line front end.  Every command prints one JSON document.

Exit codes: 0 success, 2 bad input, 3 refused by the cost budget.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__, _accel
from .circuit import IQP3, Circuit, CircuitFormatError, Gate, parse_circuit, serialize_circuit
from .core import DyadicPhase, PauliString

EXIT_INPUT = 2
EXIT_BUDGET = 3


class InputError(ValueError):
    pass


# --- output ----------------------------------------------------------------------

def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, Fraction):
        return _num(float(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.15g}")
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": _num(v.real), "im": _num(v.imag)}
    if isinstance(v, np.ndarray):
        return [_num(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    return v


def emit(doc: dict, out=None):
    out = out or sys.stdout
    out.write(json.dumps(_num(doc), indent=2) + "\n")


def exact_form(g, phase: DyadicPhase) -> dict:
    """``2^{half_exp/2} * exp(i pi octant/4)`` (or zero)."""
    if g.zero:
        return {"zero": True}
    return {"zero": False, "half_exp": g.half_exp, "octant": (g.octant + phase.to_octants()) % 8}


# --- input -----------------------------------------------------------------------

def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def read_circuit(path: str) -> Circuit:
    text = _read(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = None
    if isinstance(doc, dict) and "terms" in doc and "gates" not in doc:
        return IQP3.coerce(doc).circuit()
    return parse_circuit(text)


def read_iqp(path: str) -> IQP3:
    doc = json.loads(_read(path))
    if "terms" in doc:
        return IQP3.coerce(doc)
    return IQP3.from_circuit(parse_circuit(json.dumps(doc)))


def parse_bits(text: str, n: int | None = None) -> np.ndarray:
    text = text.strip()
    if not text or any(ch not in "01" for ch in text):
        raise InputError(f"bitstring expected, got {text!r}")
    if n is not None and len(text) != n:
        raise InputError(f"bitstring has {len(text)} bits, circuit has {n} qubits")
    return np.array([int(ch) for ch in text], np.uint8)


def parse_pauli(text: str, n: int) -> PauliString:
    p = PauliString.from_str(text)
    if p.n != n:
        raise InputError(f"Pauli acts on {p.n} qubits, circuit has {n}")
    if not p.is_hermitian():
        raise InputError(f"{text} is not Hermitian")
    return p


def parse_qubits(text: str) -> list:
    try:
        return [int(q) for q in text.split(",") if q.strip()]
    except ValueError:
        raise InputError(f"comma-separated qubit list expected, got {text!r}") from None


def parse_int_expr(text: str) -> int:
    from .pathint import parse_budget

    try:
        return parse_budget(text)
    except ValueError:
        raise InputError(f"integer expected, got {text!r}") from None


def parse_range(text: str) -> list:
    """``64..512`` (doubling) or ``64,128,256``."""
    if ".." in text:
        a, b = (int(v) for v in text.split(".."))
        out = []
        while a <= b:
            out.append(a)
            a *= 2
        return out
    return [int(v) for v in text.split(",")]


def _digest(args) -> str:
    h = hashlib.sha256()
    for key in ("input", "pauli", "x", "prob", "amp", "marginal", "qubits"):
        v = getattr(args, key, None)
        if v is None:
            continue
        h.update(key.encode())
        if key == "input" and v != "-" and os.path.exists(v):
            with open(v, "rb") as fh:
                h.update(fh.read())
        else:
            h.update(str(v).encode())
    return h.hexdigest()[:16]


# --- commands ------------------------------------------------------------------------

PASSES = ("parallelize", "d-one-layer", "ccz", "ckz:k,l", "clz:m,m'", "iqp3-td1", "htest", "htest-compile:mode")


def _pass_ints(name, arg, count):
    try:
        vals = [int(v) for v in arg.split(",")] if arg else []
    except ValueError:
        vals = []
    if len(vals) != count:
        raise InputError(f"pass {name} expects {count} comma-separated integers, e.g. {name}:2,3")
    return vals


def cmd_compile(args) -> dict:
    from . import compile as cp

    name, _, arg = args.pass_spec.partition(":")

    def need_input():
        if not args.input:
            raise InputError(f"pass {name} needs -i/--input")
        return args.input

    if name == "ccz":
        out = cp.decompose_ccz()
        rep = cp._report("ccz", Circuit(3, [Gate("CCZ", (0, 1, 2))]), out, 0)
    elif name == "ckz":
        out, rep = cp.synth_ckz_one_layer(*_pass_ints(name, arg, 2))
    elif name == "clz":
        out, rep = cp.synth_clz_sandwich(*_pass_ints(name, arg, 2))
    elif name == "iqp3-td1":
        out, rep = cp.iqp3_to_tdepth1(read_iqp(need_input()))
    elif name == "htest":
        out, _ = cp.build_hadamard_test(read_iqp(need_input()))
        rep = cp._report("htest", None, out, 1)
    elif name == "htest-compile":
        mode = arg or "t-depth2"
        path = need_input()
        doc = json.loads(_read(path))
        c = cp.build_hadamard_test(IQP3.coerce(doc))[0] if "terms" in doc else parse_circuit(json.dumps(doc))
        out, rep = cp.compile_hadamard_test(c, mode)
    elif name == "parallelize":
        out, rep = cp.parallelize_diagonals(read_circuit(need_input()))
    elif name == "d-one-layer":
        d = Gate(args.d_gate, (0,), Fraction(args.d_power))
        out, rep = cp.compile_d_to_one_layer(read_circuit(need_input()), d)
    else:
        raise InputError(f"unknown pass {args.pass_spec!r}; expected one of {', '.join(PASSES)}")
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(serialize_circuit(out))
    res = {"report": rep.to_dict(), "n_out": out.n}
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(_num(rep.to_dict()), fh, indent=2)
    if args.print_circuit:
        res["circuit"] = json.loads(serialize_circuit(out))
    return res


def cmd_exact_pauli(args) -> dict:
    from .exact import exact_pauli_circuit

    c = read_circuit(args.input)
    p = parse_pauli(args.pauli, c.n)
    val, g, ph = exact_pauli_circuit(c, p, exact=True)
    return {"value": val, "exact": exact_form(g, ph)}


def _cfg(args):
    from .estimate import EstimatorConfig

    return EstimatorConfig(args.eps, args.delta, args.seed, args.samples_override)


def cmd_estimate(args) -> dict:
    from . import estimate as es

    c = read_circuit(args.input)
    prob = es.DepthOneProblem.from_circuit(c)
    cfg = _cfg(args)
    modes = [m for m in ("pauli", "prob", "marginal", "amp") if getattr(args, m) is not None]
    if len(modes) != 1:
        raise InputError("give exactly one of --pauli, --prob, --marginal, --amp")
    mode = modes[0]
    if mode == "pauli":
        r = es.estimate_observable(prob, None, parse_pauli(args.pauli, c.n), cfg)
    elif mode == "prob":
        qubits = parse_qubits(args.qubits) if args.qubits else None
        bits = parse_bits(args.prob, len(qubits) if qubits else c.n)
        r = es.estimate_probability(prob, None, None, bits, cfg, qubits=qubits)
    elif mode == "marginal":
        est, r = es.estimate_marginal(prob, None, None, parse_qubits(args.marginal), cfg)
        out = r.to_dict()
        out["value"] = est
        return out
    else:
        r = es.estimate_amplitude(prob, None, None, parse_bits(args.amp, c.n), cfg)
    return r.to_dict()


def cmd_marginal(args) -> dict:
    from . import estimate as es

    c = read_circuit(args.input)
    prob = es.DepthOneProblem.from_circuit(c)
    qubits = parse_qubits(args.qubits)
    samples, q = es.sample_marginal(prob, None, None, qubits, _cfg(args), args.shots, return_probs=True)
    return {"qubits": qubits, "probabilities": q, "samples": ["".join(map(str, s)) for s in samples]}


def cmd_path_amp(args) -> dict:
    from .pathint import path_integral_amplitude

    c = read_circuit(args.input)
    x = parse_bits(args.x, c.n)
    budget = parse_int_expr(args.budget) if args.budget else None
    t = time.perf_counter()
    r = path_integral_amplitude(c, x, prune=not args.no_prune, budget=budget, full=True)
    out = r.to_dict()
    out["value"] = r.value
    out["wall_time_s"] = time.perf_counter() - t
    return out


def cmd_oracle(args) -> dict:
    from . import oracle

    if args.mode == "iqp3":
        iqp = read_iqp(args.input)
        x = parse_bits(args.x, iqp.n) if args.x else None
        v = oracle.iqp3_amplitude_bruteforce(iqp, x)
        return {"value": v, "fraction": f"{v.numerator}/{v.denominator}"}
    c = read_circuit(args.input)
    st = oracle.simulate(c, cap=args.cap)
    if args.mode == "amp":
        if not args.x:
            raise InputError("--x is required for --mode amp")
        return {"value": oracle.amplitude(st, parse_bits(args.x, c.n))}
    if args.mode == "pauli":
        if not args.pauli:
            raise InputError("--pauli is required for --mode pauli")
        return {"value": oracle.expectation(st, parse_pauli(args.pauli, c.n))}
    qubits = parse_qubits(args.qubits) if args.qubits else None
    return {"value": oracle.distribution(st, qubits)}


def cmd_bench(args) -> dict:
    from . import bench

    sizes = parse_range(args.n)
    if args.kind == "kernels":
        rows = bench.compare_backends(sizes, args.repeats, args.seed)
    else:
        rows = bench.scaling(args.op, sizes, args.repeats, args.seed)
    if not args.quiet:
        print(bench.format_table(rows), file=sys.stderr)
    return {"rows": rows}


def _suite_examples() -> list:
    """Fast checks of documented example values."""
    from . import oracle
    from .compile import decompose_ccz, gate_counts
    from .exact import exact_pauli_ch3
    from .pathint import path_integral_amplitude

    P = PauliString.from_str
    bell = Circuit(2, [Gate("H", (0,)), Gate("CNOT", (0, 1))])
    checks = [
        ("exact T-Bell XY", exact_pauli_ch3(bell, [Gate("T", (0,)), Gate("T", (1,))], P("XY")), 1.0),
        ("exact H;T Z", exact_pauli_ch3(Circuit(1, [Gate("H", (0,))]), [Gate("T", (0,))], P("Z")), 0.0),
        ("iqp3 single CCZ", float(oracle.iqp3_amplitude_bruteforce((3, [(0, 1, 2)]))), 0.75),
        ("ccz T-count", gate_counts(decompose_ccz()).get("T", 0), 7),
        ("path identity", path_integral_amplitude(Circuit(2, [Gate("T", (0,))]), [0, 0]).real, 1.0),
    ]
    return [{"check": name, "value": v, "expected": e, "ok": abs(v - e) < 1e-12} for name, v, e in checks]


def cmd_verify(args) -> dict:
    if args.suite == "examples":
        rows = _suite_examples()
        return {"suite": "examples", "passed": all(r["ok"] for r in rows), "checks": rows}
    path = args.tests or os.path.join(os.getcwd(), "tests", "test_acceptance.py")
    if not os.path.exists(path):
        raise InputError(f"acceptance tests not found at {path}")
    import subprocess

    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-s", path], capture_output=True, text=True)
    lines = [ln for ln in proc.stdout.splitlines() if ln.startswith(("PASS", "FAIL"))]
    return {"suite": "acceptance", "passed": proc.returncode == 0, "lines": lines}


# --- parser ----------------------------------------------------------------------

def _add_est(p):
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples-override", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="magicdepth", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                    help="recorded only; results do not depend on it")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="run a compilation pass")
    p.add_argument("--pass", dest="pass_spec", required=True, metavar="PASS",
                   help="one of: " + ", ".join(PASSES))
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")
    p.add_argument("--report", help="write the pass report JSON here")
    p.add_argument("--d-gate", default="T", help="designated gate for d-one-layer")
    p.add_argument("--d-power", default="1")
    p.add_argument("--print-circuit", action="store_true")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("exact-pauli", help="exact Pauli expectation, one CH3 layer")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--pauli", required=True)
    p.set_defaults(fn=cmd_exact_pauli)

    p = sub.add_parser("estimate", help="Monte-Carlo estimate, one diagonal layer")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--pauli")
    p.add_argument("--prob")
    p.add_argument("--marginal")
    p.add_argument("--amp")
    p.add_argument("--qubits", help="restrict --prob to these qubits")
    _add_est(p)
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("marginal", help="sample k-qubit marginals")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--qubits", required=True)
    p.add_argument("--shots", type=int, default=10)
    _add_est(p)
    p.set_defaults(fn=cmd_marginal)

    p = sub.add_parser("path-amp", help="path-integral amplitude <x|U|0>")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--budget", default=None, help="branch budget, e.g. 2^30 (env MAGICDEPTH_BUDGET)")
    p.add_argument("--no-prune", action="store_true")
    p.set_defaults(fn=cmd_path_amp)

    p = sub.add_parser("oracle", help="dense / brute-force reference values")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--mode", required=True, choices=["amp", "pauli", "dist", "iqp3"])
    p.add_argument("--x")
    p.add_argument("--pauli")
    p.add_argument("--qubits")
    p.add_argument("--cap", type=int, default=20)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("bench", help="timings")
    p.add_argument("kind", choices=["kernels", "scaling"])
    p.add_argument("--op", default="inner-product", choices=["inner-product", "exact-pauli", "canonicalize"])
    p.add_argument("--n", default="64..512")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("verify", help="run a named check suite")
    p.add_argument("suite", choices=["examples", "acceptance"])
    p.add_argument("--tests", help="path to the acceptance test file")
    p.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    from .pathint import BudgetExceeded

    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    t = time.perf_counter()
    try:
        res = args.fn(args)
    except BudgetExceeded as e:
        print(f"magicdepth: {e}", file=sys.stderr)
        emit({"error": "budget", "estimated_branches": e.estimate, "budget": e.budget})
        return EXIT_BUDGET
    except (InputError, CircuitFormatError, ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"magicdepth: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    res["run"] = {
        "command": args.command,
        "inputs_digest": _digest(args),
        "seed": getattr(args, "seed", None),
        "wall_time_s": time.perf_counter() - t,
        "threads": args.threads,
        "backend": _accel.backend(),
        "version": __version__,
    }
    emit(res)
    if args.command == "verify" and not res.get("passed", False):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
