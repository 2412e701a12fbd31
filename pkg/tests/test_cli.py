import json

import pytest

from nwss import cli
from nwss.channel import symmetric_config
from nwss.verify import CheckResult, VerifyReport


@pytest.fixture
def cfg_path(tmp_path, desk_cfg):
    p = tmp_path / "cfg.json"
    doc = desk_cfg.to_dict()
    doc["sweep"] = {"param": "snr_db", "grid": [0, 10], "methods": ["closed_form", "mc_jensen"],
                    "trials": 500, "seed": 3}
    p.write_text(json.dumps(doc))
    return p


def test_bound(cfg_path, capsys):
    assert cli.main(["bound", "--config", str(cfg_path), "--high-snr"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["closed_form"] == pytest.approx(13.146440193489614, rel=1e-12)
    assert out["high_snr"] < out["closed_form"]


def test_capacity(cfg_path, capsys):
    assert cli.main(["capacity", "--config", str(cfg_path), "--trials", "300",
                     "--methods", "mc_capacity,mmse_rate", "--workers", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert set(out) == {"mc_capacity", "mmse_rate"}
    assert out["mc_capacity"]["trials"] == 300


def test_sweep_from_config_block(cfg_path, tmp_path):
    out = tmp_path / "s.csv"
    assert cli.main(["sweep", "--config", str(cfg_path), "--out", str(out), "--no-timing"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("sweep_param,value,method")
    assert len(lines) == 5


def test_sweep_flags_override_block(cfg_path, capsys):
    assert cli.main(["sweep", "--config", str(cfg_path), "--param", "rho_p", "--grid", "0.25,0.75",
                     "--methods", "closed_form"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [l.split(",")[:3] for l in lines[1:]] == [["rho_p", "0.25", "closed_form"],
                                                     ["rho_p", "0.75", "closed_form"]]


def test_sweep_empty_grid(cfg_path, capsys):
    assert cli.main(["sweep", "--config", str(cfg_path), "--grid", ""]) == 0
    assert capsys.readouterr().out.count("\n") == 1


def test_eigen(cfg_path, tmp_path, capsys):
    assert cli.main(["eigen", "--config", str(cfg_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "index,eigenvalue" and len(lines) == 5
    out = tmp_path / "e.csv"
    assert cli.main(["eigen", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert out.read_text().splitlines() == lines


def test_budget_exit_code(cfg_path, capsys):
    assert cli.main(["bound", "--config", str(cfg_path), "--budget", "10"]) == cli.EXIT_BUDGET
    assert "combinatorial explosion" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["bound", "--config", "/nonexistent.json"],
    ["sweep", "--config", "{cfg}", "--param", "bogus"],
    ["sweep", "--config", "{cfg}", "--grid", "1,x"],
    ["capacity", "--config", "{cfg}", "--methods", "closed_form"],
    ["capacity", "--config", "{cfg}", "--trials", "0"],
    ["verify", "--level", "medium"],
    ["frobnicate"],
])
def test_validation_exit_code(argv, cfg_path):
    argv = [a.replace("{cfg}", str(cfg_path)) for a in argv]
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == cli.EXIT_INVALID


def test_invalid_scenario_exit_code(tmp_path):
    p = tmp_path / "bad.json"
    d = symmetric_config(4, 4, 4, 2, 2, 0.5).to_dict()
    d["S"] = 9
    p.write_text(json.dumps(d))
    assert cli.main(["bound", "--config", str(p)]) == cli.EXIT_INVALID


@pytest.mark.parametrize("passed,code", [(True, 0), (False, 2)])
def test_verify_exit_code(monkeypatch, capsys, passed, code):
    report = VerifyReport("fast", [CheckResult(1, "stub", passed, "m", "e")])
    monkeypatch.setattr(cli, "run_verify", lambda level, workers=1: report)
    assert cli.main(["verify"]) == code
    assert "stub" in capsys.readouterr().out
