import json
import math
import os

import numpy as np
import pytest

from vvlab.analysis import ConvergenceTable, NormSeries
from vvlab.cli import (ConfigError, ExperimentConfig, Report, emit_outputs, main, run_experiment,
                       series_field)

SMALL_GRIDS = {"n_wall": 65, "n_periodic": 4, "n_steps": 64, "refine": 2}
SMALL_EPS = [1e-2, 3.16e-3, 1e-3, 3.16e-4]


def _config(tmp_path, name="run", **kw):
    d = {"case": "channel", "data": {"preset": "zero"}, "eps_list": SMALL_EPS, "grids": SMALL_GRIDS,
         "n_samples": 5, "checks": ["l1", "sheet", "lighthill"], "out": str(tmp_path / name)}
    d.update(kw)
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(d))
    return str(path), d


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

def test_validation_collects_every_problem():
    d = {"case": "duct", "eps_list": [1e-2, 1e-3], "grids": {"n_periodic": 6, "n_wall": 3, "bogus": 1},
         "n_samples": 2, "T": -1.0, "checks": ["rates", "speed"], "out": ""}
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict(d)
    text = "\n".join(info.value.problems)
    for key in ("case:", "eps_list:", "grids.n_periodic", "grids.n_wall", "grids.bogus", "n_samples",
                "T:", "checks:", "out:"):
        assert key in text, key
    assert len(info.value.problems) >= 9


@pytest.mark.parametrize("bad", [
    {"eps_list": [1e-2, 1e-3, 1e-3, 1e-4]},
    {"eps_list": [1e-2, 1e-3, -1e-3, 1e-4]},
    {"case": "pipe", "checks": ["lighthill"]},
    {"case": "pipe", "data": {"preset": "compatible"}},
    {"data": {"preset": "reference"}, "geometry": {"h": 2.0}},
    {"data": {"g1": {"poly": [1.0]}}},
    {"data": {"g1": {"poly": [1.0]}, "g2": {"terms": [{"k": -1, "kind": "tan", "poly": []}]}}},
    {"case": "pipe", "data": {"preset": "reference"}, "geometry": {"rL": 3.0, "rR": 1.0}},
    {"grids": {"n_steps": 63}},
    {"unknown_field": 1},
    {"checks": ["l1", "l1"]},
])
def test_invalid_configs_rejected(bad):
    d = {"eps_list": SMALL_EPS, "n_samples": 5, "grids": SMALL_GRIDS}
    d.update(bad)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(d)


def test_config_round_trip():
    cfg = ExperimentConfig.from_dict({"case": "pipe", "data": {"preset": "csf"}, "eps_list": SMALL_EPS,
                                      "grids": {"n_wall": 65}, "n_samples": 5, "checks": ["l1"]})
    assert cfg.grids["n_wall"] == 65 and cfg.grids["refine"] == 4
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert again == cfg
    gs = again.grid_settings()
    assert gs.n_wall == 65 and gs.n_samples == 5


def test_series_field_evaluation():
    f = series_field({"terms": [{"k": 0, "poly": [1.0, 1.0, -1.0]},
                                {"k": 2, "kind": "sin", "poly": [0.0, 2.0], "t_poly": [1.0, 3.0]}]}, 2.0)
    s, w, t = 0.3, 0.7, 0.25
    assert f(s, w, t) == pytest.approx(1 + w - w * w + math.sin(2 * math.pi * 2 * s / 2.0) * 2 * w * (1 + 3 * t),
                                       abs=1e-15)
    g = series_field({"poly": [2.0]}, 1.0)
    np.testing.assert_array_equal(g(np.zeros(3), np.ones(3)), 2.0)
    with pytest.raises(ValueError):
        series_field({"terms": [{"kind": "tan", "poly": [1.0]}]}, 1.0)


def test_inline_data_matches_preset(tmp_path):
    common = {"eps_list": SMALL_EPS, "grids": SMALL_GRIDS, "n_samples": 5, "checks": ["l1"]}
    inline = {"g1": {"poly": [1.0, 0.0, -2.0]},
              "g2": {"terms": [{"k": 0, "poly": [1.0, 1.0, -1.0]}, {"k": 1, "poly": [1.0, 1.0, -1.0]}]}}
    a = run_experiment(ExperimentConfig.from_dict({**common, "data": {"preset": "reference"}}))
    b = run_experiment(ExperimentConfig.from_dict({**common, "data": inline}))
    for ra, rb in zip(a.table.rows(), b.table.rows()):
        assert ra[:2] == rb[:2]
        assert rb[2] == pytest.approx(ra[2], rel=1e-12, abs=1e-14)


# --------------------------------------------------------------------------
# Output files
# --------------------------------------------------------------------------

def _fake_report(tmp_path, series):
    cfg = ExperimentConfig.from_dict({"eps_list": SMALL_EPS, "n_samples": 5, "grids": SMALL_GRIDS,
                                      "checks": [], "out": str(tmp_path)})
    table = ConvergenceTable("channel", tuple(series), (), {})
    return Report(cfg, table, {}, {})


def test_emit_outputs_format(tmp_path):
    vals = (1 / 3, 2 / 3, 0.1, 1e-300)
    rep = _fake_report(tmp_path, [NormSeries("v_LinfL2", vals, tuple(SMALL_EPS))])
    written = emit_outputs(rep, str(tmp_path / "out"))
    assert {os.path.basename(p) for p in written} == {"report.json", "series.csv", "v_LinfL2.csv",
                                                      "sheet_gaps.csv", "summary.txt"}
    lines = (tmp_path / "out" / "tables" / "v_LinfL2.csv").read_text().splitlines()
    assert lines[0] == "eps,norm_id,value"
    assert lines[1] == "0.01,v_LinfL2,0.33333333333333331"
    parsed = [float(l.split(",")[2]) for l in lines[1:]]
    assert parsed == list(vals)
    eps = [float(l.split(",")[0]) for l in lines[1:]]
    assert eps == sorted(eps, reverse=True)
    payload = json.loads((tmp_path / "out" / "report.json").read_text())
    assert "generated_at" in payload and payload["config"]["eps_list"] == SMALL_EPS


def test_empty_report_gives_header_only_tables(tmp_path):
    rep = _fake_report(tmp_path, [])
    emit_outputs(rep, str(tmp_path / "out"))
    assert (tmp_path / "out" / "series.csv").read_text() == "eps,norm_id,value\n"
    assert (tmp_path / "out" / "sheet_gaps.csv").read_text() == "eps,norm_id,value\n"


# --------------------------------------------------------------------------
# main
# --------------------------------------------------------------------------

def test_main_exit_zero_when_checks_pass(tmp_path, capsys):
    path, d = _config(tmp_path)
    assert main(["--config", path]) == 0
    out = capsys.readouterr().out
    assert "check l1: PASS" in out and "check lighthill: PASS" in out
    assert os.path.exists(os.path.join(d["out"], "report.json"))


def test_main_exit_two_on_failed_check(tmp_path):
    # Rates of zero data are degenerate, which is a failure rather than a pass.
    path, d = _config(tmp_path, checks=["rates"])
    assert main(["--config", path]) == 2
    payload = json.loads(open(os.path.join(d["out"], "report.json")).read())
    assert payload["checks"]["rates"]["verdict"] == "fail"


def test_main_exit_one_on_errors(tmp_path, capsys):
    path, _ = _config(tmp_path, case="pipe", checks=["lighthill"])
    assert main(["--config", path]) == 1
    assert "config error" in capsys.readouterr().err
    assert main(["--config", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad)]) == 1
    path, _ = _config(tmp_path)
    assert main(["--config", path, "--threads", "0"]) == 1
    assert main(["--config", path, "--eps", "0.1,abc"]) == 1


def test_flags_override_config(tmp_path):
    path, _ = _config(tmp_path)
    out = tmp_path / "flagged"
    assert main(["--config", path, "--eps", "0.02,0.01,0.005,0.0025", "--checks", "l1", "--out", str(out)]) == 0
    payload = json.loads((out / "report.json").read_text())
    assert payload["config"]["eps_list"] == [0.02, 0.01, 0.005, 0.0025]
    assert list(payload["checks"]) == ["l1"]


def test_runs_are_deterministic(tmp_path):
    path, _ = _config(tmp_path, data={"preset": "reference"}, checks=["l1", "sheet"])
    a, b = tmp_path / "a", tmp_path / "b"
    main(["--config", path, "--out", str(a)])
    main(["--config", path, "--out", str(b), "--threads", "4"])
    for rel in ["series.csv", "sheet_gaps.csv", "summary.txt"] + [f"tables/{n}" for n in os.listdir(a / "tables")]:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel
    ja, jb = (json.loads((d / "report.json").read_text()) for d in (a, b))
    ja.pop("generated_at"), jb.pop("generated_at")
    ja["config"].pop("out"), jb["config"].pop("out")
    assert ja == jb
