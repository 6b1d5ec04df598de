import json

import pytest

from magicdepth.circuit import Circuit, Gate, parse_circuit, serialize_circuit
from magicdepth.cli import main, parse_int_expr, parse_range

T_BELL = Circuit(2, [Gate("H", (0,)), Gate("CNOT", (0, 1)), Gate("T", (0,)), Gate("T", (1,))])


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as e:
        code = e.code
    out = capsys.readouterr().out
    try:
        doc = json.loads(out)
    except json.JSONDecodeError:
        doc = None
    return code, doc


@pytest.fixture
def files(tmp_path):
    tb = tmp_path / "tbell.json"
    tb.write_text(serialize_circuit(T_BELL))
    iqp = tmp_path / "iqp.json"
    iqp.write_text(json.dumps({"n": 3, "terms": [[0, 1, 2]]}))
    return tmp_path, str(tb), str(iqp)


def test_exact_pauli_t_bell(capsys, files):
    _, tb, _ = files
    code, doc = run(capsys, "exact-pauli", "-i", tb, "--pauli", "XY")
    assert code == 0
    assert doc["value"] == pytest.approx(1.0)
    assert doc["exact"] == {"zero": False, "half_exp": 0, "octant": 0}
    assert {"command", "seed", "wall_time_s", "backend"} <= set(doc["run"])


def test_estimate_and_seed_determinism(capsys, files):
    _, tb, _ = files
    args = ("estimate", "-i", tb, "--pauli", "XX", "--eps", "0.2", "--seed", "5")
    _, a = run(capsys, *args)
    _, b = run(capsys, *args)
    assert a["value"] == b["value"]
    _, amp = run(capsys, "estimate", "-i", tb, "--amp", "11", "--eps", "0.2")
    assert amp["value"]["im"] == pytest.approx(2 ** -0.5, abs=0.2)


def test_marginal_and_oracle(capsys, files):
    _, tb, iqp = files
    code, doc = run(capsys, "marginal", "-i", tb, "--qubits", "0,1", "--shots", "4")
    assert code == 0 and len(doc["samples"]) == 4
    assert sum(doc["probabilities"]) == pytest.approx(1)
    _, doc = run(capsys, "oracle", "-i", iqp, "--mode", "iqp3")
    assert doc["fraction"] == "3/4"
    _, doc = run(capsys, "oracle", "-i", tb, "--mode", "amp", "--x", "11")
    assert doc["value"]["im"] == pytest.approx(2 ** -0.5)


def test_path_amp_and_budget(capsys, files):
    _, tb, _ = files
    code, doc = run(capsys, "path-amp", "-i", tb, "--x", "11")
    assert code == 0 and doc["value"]["im"] == pytest.approx(2 ** -0.5)
    assert doc["branches"] <= doc["bound"]
    code, doc = run(capsys, "path-amp", "-i", tb, "--x", "11", "--budget", "0")
    assert code == 3 and doc["error"] == "budget"


def test_compile_with_report(capsys, files):
    tmp, _, iqp = files
    rep, out = tmp / "rep.json", tmp / "out.json"
    code, _ = run(capsys, "compile", "--pass", "ckz:3,4", "--report", str(rep), "-o", str(out))
    assert code == 0
    r = json.loads(rep.read_text())
    assert r["depth_after"] == 1 and r["notes"]["rotations"] == 15
    assert parse_circuit(out.read_text()).n >= 4
    code, doc = run(capsys, "compile", "--pass", "iqp3-td1", "-i", iqp)
    assert code == 0 and doc["report"]["depth_after"] == 1


@pytest.mark.parametrize("argv", [
    ("exact-pauli", "--bogus"),
    ("path-amp", "-i", "{tb}", "--x", "1a"),
    ("path-amp", "-i", "{tb}", "--x", "101"),
    ("exact-pauli", "-i", "{tb}", "--pauli", "XQ"),
    ("exact-pauli", "-i", "/nonexistent.json", "--pauli", "XY"),
    ("compile", "--pass", "nope"),
])
def test_bad_input_exit_code(capsys, files, argv):
    _, tb, _ = files
    code, _ = run(capsys, *[a.format(tb=tb) for a in argv])
    assert code == 2


def test_verify_examples(capsys):
    code, doc = run(capsys, "verify", "examples")
    assert code == 0 and doc["passed"]


def test_bench_scaling_quiet(capsys):
    code, doc = run(capsys, "bench", "scaling", "--n", "64..128", "--repeats", "1", "--quiet")
    assert code == 0 and doc is not None


def test_helpers():
    assert parse_int_expr("2^10") == 1024
    assert parse_range("64..512") == [64, 128, 256, 512]
