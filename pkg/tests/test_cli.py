"""Config ingestion, CLI exit codes, and output-file contracts."""

import csv
import json

import pytest

from ddlink_sim import cli
from ddlink_sim.config import (
    ParseError,
    SystemConfig,
    ValidationError,
    config_from_dict,
    load_config,
)
from ddlink_sim.validation import CheckResult, check_truncation_energy, check_worked_example

SMALL = {
    "N": 8,
    "M": 8,
    "N_p": 3,
    "l_max": 4,
    "L_0": 4,
    "U": 4,
    "trials": 5,
    "rho_T_grid": [0.0, 10.0],
}


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


# === config loading ==================================================


def test_empty_config_gives_defaults(tmp_path):
    cfg = load_config(write_config(tmp_path, {}))
    assert cfg == SystemConfig()
    assert (cfg.A, cfg.N, cfg.M, cfg.U) == (4, 16, 16, 8)
    assert cfg.rho_T_grid == tuple(float(db) for db in range(0, 21, 2))


def test_none_path_gives_defaults():
    assert load_config(None) == SystemConfig()


def test_too_many_users_rejected(tmp_path):
    with pytest.raises(ValidationError, match="U"):
        load_config(write_config(tmp_path, {"U": 20, "M": 16}))


def test_bad_power_share_rejected(tmp_path):
    with pytest.raises(ValidationError, match="p0"):
        load_config(write_config(tmp_path, {"p0": 1.5}))


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ValidationError, match="bogus"):
        load_config(write_config(tmp_path, {"bogus": 1}))


def test_malformed_json_rejected(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ParseError):
        load_config(path)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ParseError):
        load_config(tmp_path / "absent.json")


def test_manifest_shaped_document_unwraps(tmp_path):
    manifest = {
        "tool": "ddlink-sim",
        "command": "hm-sweep",
        "config": {"N": 8, "M": 8, "U": 4, "N_p": 3},
    }
    cfg = load_config(write_config(tmp_path, manifest))
    assert (cfg.N, cfg.M, cfg.U, cfg.N_p) == (8, 8, 4, 3)


def test_config_from_dict_round_trips():
    cfg = config_from_dict(SMALL)
    again = config_from_dict(cfg.to_dict())
    assert cfg == again


# === exit codes ======================================================


def test_bad_config_exits_2(tmp_path):
    path = write_config(tmp_path, {"p0": 2.0})
    code = cli.main(["validate", "--config", str(path)])
    assert code == 2


def test_zero_workers_exits_2(tmp_path):
    path = write_config(tmp_path, SMALL)
    code = cli.main(
        ["hm-sweep", "--config", str(path), "--out", str(tmp_path / "out"), "--workers", "0"]
    )
    assert code == 2


def test_single_mode_sweep_exits_2(tmp_path):
    path = write_config(tmp_path, dict(SMALL, mode="real"))
    code = cli.main(["hm-sweep", "--config", str(path), "--out", str(tmp_path / "out")])
    assert code == 2


def test_unwritable_out_exits_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x", encoding="utf-8")
    path = write_config(tmp_path, SMALL)
    code = cli.main(["hm-sweep", "--config", str(path), "--out", str(blocker / "sub")])
    assert code == 3


# === end-to-end sweeps on a tiny grid ================================


def test_hm_sweep_csv_contract(tmp_path):
    config_path = write_config(tmp_path, SMALL)
    out = tmp_path / "run"
    assert cli.main(["hm-sweep", "--config", str(config_path), "--out", str(out)]) == 0
    rows = read_csv(out / "hm_sweep.csv")
    assert rows[0] == list(cli._HM_HEADER)
    # two p0 configurations times two grid points
    assert len(rows) == 1 + 4
    for row in rows[1:]:
        values = [float(x) for x in row]
        assert values[0] in (0.0, 10.0)
        assert values[1] in (0.5, 0.8)
        # gap column repeats the paired mean difference
        assert values[6] == pytest.approx(values[4] - values[2], abs=1e-12)
    summary = json.loads((out / "hm_sweep_summary.json").read_text(encoding="utf-8"))
    assert [s["p0"] for s in summary["sweeps"]] == [0.5, 0.8]
    manifest = json.loads((out / "hm_sweep_manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "hm-sweep"
    assert manifest["config"]["trials"] == 5


def test_hm_sweep_seed_and_trials_overrides(tmp_path):
    config_path = write_config(tmp_path, SMALL)
    out = tmp_path / "run"
    code = cli.main(
        [
            "hm-sweep",
            "--config",
            str(config_path),
            "--out",
            str(out),
            "--seed",
            "99",
            "--trials",
            "3",
        ]
    )
    assert code == 0
    manifest = json.loads((out / "hm_sweep_manifest.json").read_text(encoding="utf-8"))
    assert manifest["master_seed"] == 99
    assert manifest["config"]["trials"] == 3
    assert len(read_csv(out / "hm_sweep.csv")) == 1 + 4


def test_manifest_rerun_reproduces_csv_bitwise(tmp_path):
    config_path = write_config(tmp_path, SMALL)
    first = tmp_path / "first"
    second = tmp_path / "second"
    assert cli.main(["hm-sweep", "--config", str(config_path), "--out", str(first)]) == 0
    manifest_path = first / "hm_sweep_manifest.json"
    assert cli.main(["hm-sweep", "--config", str(manifest_path), "--out", str(second)]) == 0
    assert (first / "hm_sweep.csv").read_bytes() == (second / "hm_sweep.csv").read_bytes()


def test_lm_sweep_works_in_real_mode(tmp_path):
    config_path = write_config(tmp_path, dict(SMALL, mode="real"))
    out = tmp_path / "run"
    assert cli.main(["lm-sweep", "--config", str(config_path), "--out", str(out)]) == 0
    rows = read_csv(out / "lm_sweep.csv")
    assert rows[0] == list(cli._LM_HEADER)
    assert len(rows) == 1 + 4
    for row in rows[1:]:
        values = [float(x) for x in row]
        assert all(v >= 0.0 for v in values[2:])


def test_outage_bounds_and_thresholds(tmp_path):
    config_path = write_config(tmp_path, SMALL)
    out = tmp_path / "run"
    assert cli.main(["outage", "--config", str(config_path), "--out", str(out)]) == 0
    rows = read_csv(out / "outage.csv")
    assert rows[0] == list(cli._OUTAGE_HEADER)
    # one p0, two grid points, two thresholds
    assert len(rows) == 1 + 4
    seen_thresholds = set()
    for row in rows[1:]:
        values = [float(x) for x in row]
        seen_thresholds.add(values[2])
        assert 0.0 <= values[3] <= 1.0
        assert 0.0 <= values[5] <= 1.0
    assert seen_thresholds == {0.3, 0.6}


def test_csv_values_round_trip_exactly(tmp_path):
    config_path = write_config(tmp_path, SMALL)
    out = tmp_path / "run"
    assert cli.main(["hm-sweep", "--config", str(config_path), "--out", str(out)]) == 0
    from ddlink_sim.simkit import run_sweep

    cfg = load_config(config_path).replace(p0=0.5)
    expected = run_sweep(cfg, thresholds=None).points[0]
    rows = read_csv(out / "hm_sweep.csv")
    assert float(rows[1][2]) == expected.se_hm_real_mean
    assert float(rows[1][6]) == expected.gap_mean


# === validate plumbing ===============================================


def passing_check(name):
    return CheckResult(name, True, 0.0, 1e-9, "<=", "synthetic")


def test_validate_reports_and_exits_0_on_pass(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(
        cli, "run_validation", lambda cfg, report: [passing_check("a"), passing_check("b")]
    )
    config_path = write_config(tmp_path, SMALL)
    code = cli.main(["validate", "--config", str(config_path)])
    assert code == 0
    assert "2/2 checks passed" in capsys.readouterr().out


def test_validate_exits_1_on_failure(tmp_path, capsys, monkeypatch):
    failing = CheckResult("bad", False, 1.0, 1e-9, "<=", "synthetic")
    monkeypatch.setattr(
        cli, "run_validation", lambda cfg, report: [passing_check("a"), failing]
    )
    config_path = write_config(tmp_path, SMALL)
    code = cli.main(["validate", "--config", str(config_path)])
    assert code == 1
    assert "1/2 checks passed" in capsys.readouterr().out


def test_validate_writes_report_when_out_given(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "run_validation", lambda cfg, report: [passing_check("a")])
    config_path = write_config(tmp_path, SMALL)
    out = tmp_path / "report"
    assert cli.main(["validate", "--config", str(config_path), "--out", str(out)]) == 0
    payload = json.loads((out / "validation_report.json").read_text(encoding="utf-8"))
    assert payload["checks"][0]["name"] == "a"
    assert (out / "validate_manifest.json").exists()


def test_validate_report_serializes_real_check_results(tmp_path, monkeypatch):
    # Real checks compare numpy scalars; the results must still carry
    # plain Python values all the way through the JSON report writer.
    monkeypatch.setattr(
        cli,
        "run_validation",
        lambda cfg, report: [check_truncation_energy(), check_worked_example()],
    )
    config_path = write_config(tmp_path, SMALL)
    out = tmp_path / "report"
    assert cli.main(["validate", "--config", str(config_path), "--out", str(out)]) == 0
    payload = json.loads((out / "validation_report.json").read_text(encoding="utf-8"))
    names = [check["name"] for check in payload["checks"]]
    assert names == ["truncation", "worked-example"]
    assert all(check["passed"] is True for check in payload["checks"])
