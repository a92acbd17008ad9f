import csv
import json
from dataclasses import asdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dissipative_qec.cli import main
from dissipative_qec.scenario import (
    Scenario,
    ScenarioError,
    bundled_scenarios,
    dump_scenario,
    load_scenario,
    parse_scenario,
)

MINIMAL = """\
n_qubits = 1
[stabilizers]
Z
[unitaries]
X
"""


def read_rows(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


def test_bundled_scenarios_present():
    assert {"three_qubit_product", "three_qubit_naive", "single_qubit"} <= set(bundled_scenarios())
    sc = load_scenario("three_qubit_product")
    assert sc.stabilizers == ["ZZI", "IZZ", "ZIZ"]
    assert np.isclose(np.linalg.norm(sc.initial_vector), 1)


def test_parse_minimal_defaults():
    sc = parse_scenario(MINIMAL)
    assert sc.n_qubits == 1 and sc.kappa == 1.0 and sc.n_samples == 201 and sc.controls == "product"


@pytest.mark.parametrize(
    "text,line,key",
    [
        ("n_qubits = 1\nfoo = 2\n", 2, None),
        ("n_qubits = x\n", 1, "n_qubits"),
        ("n_qubits = 1\n[bogus]\n", 2, None),
        (MINIMAL + "[initial_state]\n1\nnope\n", 8, "initial_state"),
        ("ZZ\n", 1, None),
    ],
)
def test_parse_errors_carry_location(text, line, key):
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    assert exc.value.line == line
    assert exc.value.key == key
    assert f"line {line}" in str(exc.value)


@pytest.mark.parametrize(
    "extra,key",
    [
        ("[errors]\nXX\n", "errors"),
        ("[initial_state]\n1\n1\n", "initial_state"),
        ("[initial_state]\n1\n", "initial_state"),
        ("n_samples = 1\n", "n_samples"),
        ("controls = other\n", "controls"),
    ],
)
def test_invariant_violations_name_the_field(extra, key):
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(MINIMAL + extra)
    assert exc.value.key == key


def test_negative_strength_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario(MINIMAL + "gamma = -1\n")


def test_missing_required_key():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario("[stabilizers]\nZ\n[unitaries]\nX\n")
    assert exc.value.key == "n_qubits"


def test_bundled_round_trip():
    for name in bundled_scenarios():
        sc = load_scenario(name)
        again = parse_scenario(dump_scenario(sc))
        assert asdict(again) == asdict(sc)
        assert dump_scenario(again) == dump_scenario(sc)


amps = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@settings(max_examples=40)
@given(
    st.lists(amps, min_size=4, max_size=4).filter(lambda a: np.linalg.norm(a) > 1e-3),
    st.floats(0, 100, allow_nan=False),
    st.floats(0, 100, allow_nan=False),
    st.integers(2, 5000),
)
def test_round_trip_is_exact(raw, kappa, t_final, samples):
    v = np.asarray(raw, dtype=complex)
    v = v / np.linalg.norm(v)
    sc = Scenario(2, ["ZZ"], ["XI"], ["XI", "IX"], kappa=kappa, gamma=0.5, initial_state=list(v),
                  t_final=t_final, n_samples=samples, name="rt")
    sc.validate()
    assert asdict(parse_scenario(dump_scenario(sc))) == asdict(sc)


def test_check_exit_codes(capsys):
    assert main(["check", "--scenario", "three_qubit_naive"]) == 1
    assert main(["check", "--scenario", "three_qubit_product"]) == 0
    assert main(["check", "--scenario", "single_qubit"]) == 0
    capsys.readouterr()


def test_check_bundle_contents(tmp_path, capsys):
    out = tmp_path / "naive.json"
    assert main(["check", "--scenario", "three_qubit_naive", "--output", str(out)]) == 1
    b = json.loads(out.read_text())
    first = b["strong_scalability"][0]
    assert first["index"] == 1 and not first["passed"] and "witness" in first
    assert first["worst_eigenvalue"] == pytest.approx(1.0, abs=1e-9)

    out = tmp_path / "product.json"
    assert main(["check", "--scenario", "three_qubit_product", "--output", str(out)]) == 0
    b = json.loads(out.read_text())
    assert b["lambda"]["value"] == pytest.approx(0.5, abs=1e-9)
    assert b["c_min"] == pytest.approx(1.0, abs=1e-9)
    assert b["global"]["c"] >= 0.5 - 1e-9

    out = tmp_path / "single.json"
    assert main(["check", "--scenario", "single_qubit", "--output", str(out)]) == 0
    b = json.loads(out.read_text())
    assert b["c_min"] == pytest.approx(1.0, abs=1e-9)
    assert b["lambda"]["value"] == pytest.approx(1.0, abs=1e-9)
    capsys.readouterr()


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main(["check", "--scenario", str(tmp_path / "missing.scn")]) == 2
    bad = tmp_path / "bad.scn"
    bad.write_text("n_qubits = 1\nwat\n")
    assert main(["check", "--scenario", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err
    frustrated = tmp_path / "frustrated.scn"
    frustrated.write_text("n_qubits = 2\n[stabilizers]\nZZ\nXX\nYY\n[unitaries]\nXI\nZI\nXI\n")
    assert main(["check", "--scenario", str(frustrated)]) == 2
    assert main(["simulate", "--scenario", "single_qubit", "--mode", "sideways", "--output", str(tmp_path / "x.csv")]) == 2
    assert main(["nonsense"]) == 2
    capsys.readouterr()


def test_simulate_correct_once(tmp_path, capsys):
    out = tmp_path / "fig2.csv"
    assert main(["simulate", "--scenario", "three_qubit_product", "--output", str(out)]) == 0
    text = out.read_text().splitlines()
    assert text[0].startswith("# generated")
    assert text[1] == "t,fidelity,trace,purity"
    rows = read_rows(out)
    assert len(rows) == 201
    fid = np.array([float(r["fidelity"]) for r in rows])
    t = np.array([float(r["t"]) for r in rows])
    assert np.all(np.diff(fid) >= -1e-12)
    assert np.allclose(fid, 1 - np.exp(-t), atol=2e-7)
    assert fid[-1] >= 1 - 1e-6
    capsys.readouterr()


def test_simulate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["simulate", "--scenario", "three_qubit_product", "--output", str(p), "--no-timestamp"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "t,fidelity,trace,purity"
    capsys.readouterr()


def test_simulate_t_final_zero(tmp_path, capsys):
    out = tmp_path / "zero.csv"
    assert main(["simulate", "--scenario", "three_qubit_product", "--output", str(out), "--t-final", "0"]) == 0
    rows = read_rows(out)
    assert len(rows) == 1
    # the initial state is orthogonal to the target
    assert float(rows[0]["fidelity"]) == pytest.approx(0.0, abs=1e-15)
    assert float(rows[0]["t"]) == 0.0
    capsys.readouterr()


def test_simulate_parallel_noise_sweep(tmp_path, capsys):
    out = tmp_path / "noise.csv"
    code = main([
        "simulate", "--scenario", "three_qubit_product", "--mode", "parallel-noise",
        "--kappa", "1", "10", "50", "--t-final", "2", "--samples", "5", "--no-timestamp", "--output", str(out),
    ])
    assert code == 0
    for k in ("1", "10", "50"):
        assert len(read_rows(tmp_path / f"noise_kappa{k}.csv")) == 5
    summary = read_rows(tmp_path / "noise_summary.csv")
    assert [float(r["kappa"]) for r in summary] == [1.0, 10.0, 50.0]
    fid = [float(r["steady_state_fidelity"]) for r in summary]
    assert fid == sorted(fid)
    # rate-balance value: (kappa + gamma) / (2 (kappa + 4 gamma))
    assert fid[2] == pytest.approx(51 / 108, abs=1e-9)
    capsys.readouterr()


def test_aqec_verify(tmp_path, capsys):
    out = tmp_path / "aqec.json"
    assert main(["aqec-verify", "--scenario", "three_qubit_product", "--output", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert [e["error"] for e in rep["errors"]] == ["XII", "IXI", "IIX"]
    for e in rep["errors"]:
        assert e["correctable"] and np.allclose(e["rates"], 1.0, atol=1e-9)
    assert main(["aqec-verify", "--scenario", "three_qubit_product", "--kappa", "3", "--output", str(out)]) == 0
    assert np.allclose(json.loads(out.read_text())["errors"][0]["rates"], 3.0, atol=1e-8)
    capsys.readouterr()


def test_aqec_verify_flags_double_flip(tmp_path, capsys):
    sc = load_scenario("three_qubit_product")
    sc.errors = sc.errors + ["XXI"]
    path = tmp_path / "double.scn"
    path.write_text(dump_scenario(sc))
    out = tmp_path / "double.json"
    assert main(["aqec-verify", "--scenario", str(path), "--output", str(out)]) == 1
    rep = json.loads(out.read_text())
    bad = [e for e in rep["errors"] if e["error"] == "XXI"][0]
    assert not bad["correctable"] and bad["matched_control"] is None
    assert all(e["correctable"] for e in rep["errors"] if e["error"] != "XXI")
    assert "NOT correctable" in capsys.readouterr().out


def test_aqec_verify_empty_error_list(tmp_path, capsys):
    sc = load_scenario("three_qubit_product")
    sc.errors = []
    path = tmp_path / "empty.scn"
    path.write_text(dump_scenario(sc))
    out = tmp_path / "empty.json"
    assert main(["aqec-verify", "--scenario", str(path), "--output", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["errors"] == [] and rep["invariance_passed"]
    capsys.readouterr()
