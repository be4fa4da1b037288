import json
import shutil
from pathlib import Path

import pytest

from planarstring import io
from planarstring.cli import main
from planarstring.scenario import ScenarioError, load_scenario, parse_scenario

SCEN = Path(__file__).resolve().parent.parent / "scenarios"


def _run(capsys, *argv):
    code = main([*map(str, argv), "-q"])
    out = capsys.readouterr()
    return code, out.err


def test_parse_examples():
    for name in ("vacuum", "two_strand", "four_strand", "tangle"):
        sc = load_scenario(SCEN / f"{name}.json")
        assert sc.grid.N == 4096
    sc = load_scenario(SCEN / "tangle.json")
    assert len(sc.spectra[1]) == 2 and len(sc.spectra[-1]) == 1


def test_malformed_json_reports_line():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario('{\n  "schema_version": 1,\n  "grid": {"L": 50,\n}\n')
    assert exc.value.line == 4


def test_schema_error_reports_field_and_line():
    text = '{\n  "schema_version": 1,\n  "grid": {\n    "L": -3\n  }\n}\n'
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    assert exc.value.field == "grid.L" and exc.value.line == 4


def test_scenario_semantic_errors(tmp_path):
    with pytest.raises(ScenarioError) as exc:
        parse_scenario('{"schema_version": 1, "grid": {"N": 1000}}')
    assert exc.value.field == "grid.N"
    with pytest.raises(ScenarioError):
        parse_scenario('{"schema_version": 2}')
    with pytest.raises(ScenarioError) as exc:
        parse_scenario('{"schema_version": 1, "field_files": {"plus": "missing.csv"}}', tmp_path)
    assert exc.value.field == "field_files.plus"
    with pytest.raises(ScenarioError):
        parse_scenario('{"schema_version": 1, "spectra": [{"chirality": 1, "a": 0.5, "im": 0.2, "c": 1}]}')


def test_cli_exit_code_2_with_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": 1, "grid": {"N": 100}}')
    code, err = _run(capsys, "synth", bad, "--out", tmp_path / "o")
    assert code == 2
    rec = json.loads(err)
    assert rec["stage"] == "scenario" and rec["field"] == "grid.N"


def test_cli_exit_code_3_with_stage(tmp_path, capsys):
    # a = 0.1 does not decay on a grid of half-width 20
    sc = tmp_path / "wide.json"
    sc.write_text(json.dumps({"schema_version": 1, "spectra": [{"chirality": 1, "a": 0.1, "c": 1.0}],
                              "grid": {"L": 20.0, "N": 1024}}))
    code, err = _run(capsys, "synth", sc, "--out", tmp_path / "o")
    assert code == 3
    rec = json.loads(err)
    assert rec["stage"] == "synth" and rec["error"] == "DecayError"


def test_synth_empty_spectra(tmp_path, capsys):
    code, _ = _run(capsys, "synth", SCEN / "vacuum.json", "--out", tmp_path)
    assert code == 0
    summary = json.loads((tmp_path / "synth.json").read_text())
    assert summary["n_plus"] == 0 and summary["n_minus"] == 0
    f = io.read_field_csv(tmp_path / "rho_plus.csv", 1)
    assert not f.rho.any()


def test_vacuum_pipeline(tmp_path, capsys):
    code, _ = _run(capsys, "pipeline", SCEN / "vacuum.json", "--out", tmp_path)
    assert code == 0
    ch = io.read_charges_json(tmp_path / "charges.json")
    assert all(ch[k] == 0 for k in ("P1", "P3", "J", "H")) and ch["Omega"] is None
    w = json.loads((tmp_path / "braid.json").read_text())
    assert w["n_strands"] == 0 and w["word"] == []
    assert (tmp_path / "snapshot.svg").read_text().startswith("<?xml")


def test_two_strand_pipeline_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(capsys, "pipeline", SCEN / "two_strand.json", "--out", a, "--N", 2048)[0] == 0
    assert _run(capsys, "pipeline", SCEN / "two_strand.json", "--out", b, "--N", 2048, "--threads", 3)[0] == 0
    files = sorted(p.name for p in a.iterdir())
    assert "braid.svg" in files and "cusps.csv" in files
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    w = io.read_braid_json(a / "braid.json")
    assert w.n_strands == 2 and len(w.generators) == 1
    spectrum = io.read_spectrum_json(a / "spectrum.json")
    assert abs(spectrum[1].eigenvalues[0] - 0.5j) < 1e-6 and abs(spectrum[-1].norming_constants[0] - 1) < 1e-5


def test_tangle_tangle(tmp_path, capsys):
    assert _run(capsys, "braid", SCEN / "tangle.json", "--out", tmp_path)[0] == 0
    rec = json.loads((tmp_path / "braid.json").read_text())
    kinds = [it["type"] for it in rec["tangle"]]
    assert kinds.count("birth") == 2 and kinds.count("death") == 2
    summary = json.loads((tmp_path / "braid_summary.json").read_text())
    assert summary["tangle"] is True


def test_field_file_scenario(tmp_path, capsys):
    assert _run(capsys, "synth", SCEN / "two_strand.json", "--out", tmp_path / "f")[0] == 0
    shutil.copy(tmp_path / "f" / "rho_plus.csv", tmp_path / "rho_plus.csv")
    sc = tmp_path / "from_file.json"
    sc.write_text(json.dumps({"schema_version": 1, "field_files": {"plus": "rho_plus.csv"},
                              "spectra": [{"chirality": -1, "a": 0.8, "c": 1.0}]}))
    assert _run(capsys, "charges", sc, "--out", tmp_path / "g")[0] == 0
    a = io.read_charges_json(tmp_path / "g" / "charges.json")
    assert a["n_plus"] == -1 and abs(a["H"] - 2.6) < 1e-8


def test_overrides(tmp_path, capsys):
    code, _ = _run(capsys, "charges", SCEN / "two_strand.json", "--out", tmp_path, "--kappa", 2.0, "--tol", "eps_topo=1e-5")
    assert code == 0
    ch = io.read_charges_json(tmp_path / "charges.json")
    assert abs(ch["P3"] - 3.0) < 1e-10
    code, err = _run(capsys, "charges", SCEN / "two_strand.json", "--out", tmp_path, "--tol", "eps_bogus=1")
    assert code == 2
