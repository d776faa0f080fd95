"""Scenario runner, report emission and the command line interface."""

import json
import re
from pathlib import Path

import pytest

from geomlab.cli import main
from geomlab.scenarios import (
    SCENARIOS,
    SCHEMA_VERSION,
    Check,
    ScenarioError,
    emit_report,
    load_config,
    recompute_verdict,
    run_scenario,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL_LORENTZ = {
    "scenario": "lorentz-volume",
    "seed": 5,
    "document": {"kind": "builtin", "name": "rw_c11"},
    "params": {"T": 0.6, "n_t": 6, "per_axis": 6,
               "control": {"kappa": -1.0, "beta": 0.5, "n": 3, "T": 0.6, "per_axis": 4, "tol": 1e-4},
               "mc_samples": 0},
}


@pytest.fixture(scope="module")
def table1_report():
    return run_scenario(load_config(CONFIGS / "table1_audit.json"))


@pytest.fixture(scope="module")
def lorentz_report():
    return run_scenario(SMALL_LORENTZ)


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


# ------------------------------------------------------------------ reports


def test_report_schema_and_echo(table1_report):
    d = json.loads(table1_report.to_json())
    assert d["schema"] == SCHEMA_VERSION
    assert d["scenario"] == "table1-audit"
    assert d["seed"] == 0
    assert "wall_time" not in d
    assert d["passed"] is True


def test_json_identical_across_runs(tmp_path):
    cfg = load_config(CONFIGS / "table1_audit.json")
    a = emit_report(run_scenario(cfg), ["json"], tmp_path / "a")[0].read_bytes()
    b = emit_report(run_scenario(cfg), ["json"], tmp_path / "b")[0].read_bytes()
    assert a == b


def test_seeded_sampling_is_reproducible():
    cfg = load_config(CONFIGS / "singularity_model.json")
    cfg["params"]["n_samples"] = 40
    assert run_scenario(cfg, seed=11).to_json() == run_scenario(cfg, seed=11).to_json()


def test_verdicts_recomputable_from_payload(table1_report, lorentz_report):
    for rep in (table1_report, lorentz_report):
        for c in json.loads(rep.to_json())["checks"]:
            assert recompute_verdict(c) == c["passed"]


def test_check_verdicts():
    assert Check("a", 1.0, "<=", 1.0).passed
    assert not Check("b", 2.0, "<", 1.0).passed
    assert Check("c", True, "==", True).passed
    assert not recompute_verdict({"value": 0.2, "op": ">=", "threshold": 1.5})


def test_one_csv_per_series(tmp_path, table1_report):
    paths = emit_report(table1_report, ["csv"], tmp_path)
    assert len(paths) == len(table1_report.series)
    assert all(p.suffix == ".csv" for p in paths)
    header = paths[0].read_text().splitlines()[0]
    assert header.startswith("grid,values")


def test_lorentz_svg_has_polyline_per_ratio_series(tmp_path, lorentz_report):
    ratios = [k for k, s in lorentz_report.series.items() if s.get("kind") == "ratio"]
    assert len(ratios) == 2
    svg = emit_report(lorentz_report, ["svg"], tmp_path)[0].read_text()
    assert svg.count("<polyline") == len(ratios)
    assert "nonincreasing" in svg


def test_lorentz_small_run_passes(lorentz_report):
    assert lorentz_report.passed, lorentz_report.failing()


def test_unknown_format_rejected(tmp_path, table1_report):
    with pytest.raises(ScenarioError):
        emit_report(table1_report, ["pdf"], tmp_path)


def test_unknown_scenario_in_runner():
    with pytest.raises(ScenarioError, match="valid scenarios"):
        run_scenario({"scenario": "nope"})


def test_seed_out_of_range():
    with pytest.raises(ScenarioError):
        run_scenario(load_config(CONFIGS / "table1_audit.json"), seed=2**64)


def test_missing_config_file(tmp_path):
    with pytest.raises(ScenarioError):
        load_config(tmp_path / "absent.json")


# ------------------------------------------------------------------ CLI


def test_cli_unknown_scenario_lists_names(tmp_path, capsys):
    code = main(["warp-drive", "--config", str(CONFIGS / "table1_audit.json"), "--out", str(tmp_path)])
    assert code == 2
    err = capsys.readouterr().err
    for name in SCENARIOS:
        assert name in err


def test_cli_pass_exit_zero(tmp_path, capsys):
    code = main(["table1-audit", "--config", str(CONFIGS / "table1_audit.json"), "--out", str(tmp_path),
                 "--formats", "json,csv"])
    assert code == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert (tmp_path / "table1-audit.json").exists()


def test_cli_failing_check_exit_one(tmp_path, capsys):
    # the round sphere does not satisfy Ric >= 2 (n-1): the precondition check fails
    cfg = load_config(CONFIGS / "myers_sphere2.json")
    cfg["params"].update({"kappa": 2.0, "n_bases": 2, "n_targets": 3, "antipodal_pairs": []})
    cfg.pop("_base", None)
    code = main(["myers", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("failing checks:")


def test_cli_bad_seed(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["table1-audit", "--config", str(CONFIGS / "table1_audit.json"), "--seed", "-3"])
    assert exc.value.code == 2


def test_cli_bad_document(tmp_path, capsys):
    cfg = {"scenario": "myers", "document": {"kind": "builtin", "name": "no-such-fixture"}}
    code = main(["myers", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path)])
    assert code == 2
    assert re.search(r"no-such-fixture|unknown", capsys.readouterr().err)
