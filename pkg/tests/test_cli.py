import json

import pytest

from willmore_lab.catalog import get_surface
from willmore_lab.cli import RunConfig, main, parse_config, run
from willmore_lab.errors import BadTolerance, ParseError, UnknownKey


def test_minimal_config_has_defaults():
    cfg = parse_config('command = "energy"\n[surface]\nname = "catenoid"\n')
    assert cfg.command == "energy" and cfg.surface == {"name": "catenoid"}
    assert cfg.tolerances == {"quadrature": 1e-8, "assertion": 1e-3} and cfg.seed == 0


def test_bad_tolerance():
    with pytest.raises(BadTolerance):
        parse_config('command = "energy"\n[tolerances]\nassertion = -1\n')


def test_unknown_keys():
    with pytest.raises(UnknownKey):
        parse_config('command = "energy"\ncolour = "red"\n')
    with pytest.raises(UnknownKey):
        parse_config('command = "energy"\n[surface]\nname = "sphere"\nr2 = 1.0\n')
    with pytest.raises(UnknownKey):
        parse_config('command = "energy"\n[options]\nsuite = "all"\n')


def test_parse_error_location():
    with pytest.raises(ParseError) as exc:
        parse_config('command = "energy"\n[surface]\nname = \n')
    assert exc.value.line == 3 and exc.value.column is not None


def test_trinoid_round_trip():
    cfg = parse_config('command = "energy"\n[surface]\nname = "trinoid"\nr1 = 0.0\nr2 = 2.0\n')
    again = parse_config(cfg.to_toml())
    assert again == cfg
    e = get_surface(cfg.surface["name"], r1=cfg.surface["r1"], r2=cfg.surface["r2"])
    assert e.data.name == "trinoid(r1=0,r2=2)"


def test_empty_command_is_usage(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_bundle_dim(tmp_path, capsys):
    assert main(["bundle-dim", "--genus", "0", "--divisor", "1,1,1", "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["outputs"]["gamma"] == 0
    assert "trinoid admissible" in out["outputs"]["labels"]
    assert json.loads((tmp_path / "report.json").read_text()) == out


def test_reports_are_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["energy", "--surface", "sphere", "--seed", "3"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    rep = json.loads((a / "report.json").read_text())
    assert rep["schema"] == "willmore_lab.report/1" and "wall" not in json.dumps(rep)


def test_verify_integer_suite(tmp_path, capsys):
    assert main(["verify", "--suite", "integer", "--out", str(tmp_path)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["passed"] and all(a["name"].startswith("[integer]") for a in rep["assertions"])


def test_verify_quantization_suite(tmp_path, capsys):
    assert main(["verify", "--suite", "quantization", "--out", str(tmp_path)]) == 0
    rep = json.loads(capsys.readouterr().out)
    quanta = {a["name"]: a["detail"]["W_over_4pi"] for a in rep["assertions"]}
    assert sorted(quanta.values()) == [2, 3, 3, 3]


def test_assertion_failure_exit_code(tmp_path, capsys):
    # a 1e-16 tolerance cannot be met by quadrature
    assert main(["energy", "--surface", "catenoid", "--tol", "1e-16", "--out", str(tmp_path)]) == 1


def test_error_exit_codes(tmp_path, capsys):
    assert main(["verify", "--suite", "nope", "--out", str(tmp_path)]) == 2
    assert main(["energy", "--tol", "-1", "--out", str(tmp_path)]) == 2
    assert main(["energy", "--config", str(tmp_path / "missing.toml")]) == 4
    assert main(["flow", "--input", str(tmp_path / "missing.obj"), "--out", str(tmp_path)]) == 4
    bad = tmp_path / "bad.obj"
    bad.write_text("v 0 0 zero\n")
    assert main(["flow", "--input", str(bad), "--out", str(tmp_path)]) == 2


def test_generate_quartic_and_invert(tmp_path, capsys):
    assert main(["generate", "--surface", "catenoid", "--inverted", "--n", "10", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "catenoid_inverted.obj").exists()
    assert main(["quartic", "--surface", "enneper", "--inverted", "--n", "4", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "enneper_quartic.csv").read_text().splitlines()
    assert lines[0] == "z_re,z_im,Q_re,Q_im,dbarQ_abs"
    capsys.readouterr()
    assert main(["invert", "--surface", "enneper", "--out", str(tmp_path)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["outputs"]["w_after"] == pytest.approx(37.699111843, rel=1e-6)


def test_flow_then_rescale(tmp_path, capsys):
    out = tmp_path / "flow"
    assert main(["flow", "--steps", "6", "--snapshot-every", "3", "--dt", "auto", "--out", str(out)]) == 0
    assert (out / "series.csv").read_text().startswith("step,time,W,maxA,dt")
    assert (out / "snapshot_000003.obj").exists()
    # a smoothing trajectory has no curvature concentration: numeric failure
    assert main(["rescale", "--input", str(out), "--out", str(tmp_path / "r")]) == 3
    capsys.readouterr()
    assert main(["rescale", "--synthetic", "--out", str(tmp_path / "s")]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert len(rep["outputs"]["events"]) == 5
    assert all(abs(e["catenoid"]["a"] - rep["outputs"]["events"][0]["catenoid"]["a"]) < 1e-9
               for e in rep["outputs"]["events"])


def test_run_returns_report():
    rep = run(RunConfig("bundle-dim", options={"genus": 1, "divisor": "1"}))
    assert rep.outputs["gamma"] == 2 and rep.passed
