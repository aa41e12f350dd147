import json
import logging
import os
from fractions import Fraction

import pytest

from toda_ward_lab import cli
from toda_ward_lab.utils.errors import ConfigError, NeutralityError, SeibergError

MC_CONFIG = {
    "engine": "mc",
    "gamma": 0.6,
    "bulk": [{"point": [0.3, 1.0], "alpha": [3.0, 3.0]}],
    "boundary": [{"point": -0.5, "beta": [2.0, 2.0]}, {"point": 0.8, "beta": [2.0, 2.0]}],
    "mu_bulk": [1.0, 1.0],
    "mu_boundary": [[0.5, 0.5], [0.5, 0.5]],
    "mc": {"samples": 32, "chains": 2, "bulk_grid": [6, 3], "boundary_points": 12, "batch_size": 16, "seed": 3},
}


def _write(tmp_path, payload, name="run.json"):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
    return str(path)


def _report(tmp_path, command):
    with open(os.path.join(tmp_path, "reports", f"{command}.json"), encoding="utf-8") as handle:
        return json.load(handle)


def test_malformed_json_reports_position():
    with pytest.raises(ConfigError) as excinfo:
        cli.parse_config_text('{"engine": "mc",\n  "gamma": }')
    assert excinfo.value.line == 2
    assert excinfo.value.column is not None


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError, match="colour"):
        cli.parse_config_text(json.dumps({"engine": "symbolic", "colour": "blue"}))
    with pytest.raises(ConfigError):
        cli.parse_config_text(json.dumps({"engine": "symbolic", "symbolic": {"n_bulk": 1, "extra": 2}}))
    with pytest.raises(ConfigError):
        cli.parse_config_text(json.dumps(dict(MC_CONFIG, mc={"samples": 10, "walkers": 2})))


@pytest.mark.parametrize("gamma", [0.0, 1.5, -0.2, "3/2"])
def test_gamma_range(gamma):
    with pytest.raises(ConfigError):
        cli.parse_config_text(json.dumps(dict(MC_CONFIG, gamma=gamma)))


def test_engine_must_be_known():
    with pytest.raises(ConfigError):
        cli.parse_config_text(json.dumps({"engine": "lattice"}))


def test_default_config_is_symbolic():
    rc = cli.default_config()
    assert rc.engine == "symbolic"
    assert rc.resolved["insertions"] == {"weights": "symbolic", "n_bulk": 1, "n_boundary": 1}


def test_explicit_symbolic_weights():
    rc = cli.parse_config_text(json.dumps({
        "engine": "symbolic",
        "gamma": "1/2",
        "bulk": [{"alpha": [[1, 2], 1]}],
        "boundary": [{"beta": [1, "1/3"]}],
    }))
    assert rc.resolved["gamma"] == Fraction(1, 2)
    assert rc.resolved["insertions"]["weights"] == "explicit"
    assert rc.insertions.probe is not None


def test_symbolic_engine_warns_about_numeric_gamma(caplog):
    with caplog.at_level(logging.WARNING, logger="toda_ward_lab.cli"):
        cli.parse_config_text(json.dumps({"engine": "symbolic", "gamma": 0.5}), "sym.json")
    assert any("gamma=0.5 is ignored" in r.getMessage() for r in caplog.records)
    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="toda_ward_lab.cli"):
        cli.parse_config_text(json.dumps({"engine": "symbolic"}))
        cli.parse_config_text(json.dumps(MC_CONFIG))
    assert not [r for r in caplog.records if "ignored" in r.getMessage()]


def test_explicit_probe_weight_must_neutralize():
    with pytest.raises(NeutralityError):
        cli.parse_config_text(json.dumps({
            "engine": "symbolic",
            "boundary": [{"beta": [1, 1]}],
            "symbolic": {"probe_beta": [0, 0]},
        }))


def test_mc_config_checks_seiberg_and_neutrality():
    rc = cli.parse_config_text(json.dumps(MC_CONFIG))
    assert rc.mc.samples == 32 and rc.mc.bulk_grid == (6, 3)
    assert rc.resolved["mc"]["seed"] == 3
    heavy = dict(MC_CONFIG, bulk=[{"point": [0.3, 1.0], "alpha": [5.0, 5.0]}])
    with pytest.raises(SeibergError):
        cli.parse_config_text(json.dumps(heavy))
    free = dict(MC_CONFIG, mu_bulk=[0.0, 0.0], mu_boundary=[[0.0, 0.0], [0.0, 0.0]])
    with pytest.raises(NeutralityError):
        cli.parse_config_text(json.dumps(free))
    lower = dict(MC_CONFIG, bulk=[{"point": [0.3, -1.0], "alpha": [3.0, 3.0]}])
    with pytest.raises(ConfigError):
        cli.parse_config_text(json.dumps(lower))


def test_complex_boundary_constants():
    payload = dict(MC_CONFIG, mu_boundary=[[{"re": 0.5, "im": 0.2}, 0.5], [0.5, 0.5]])
    rc = cli.parse_config_text(json.dumps(payload))
    assert rc.insertions.mu_boundary[0][0] == 0.5 + 0.2j
    assert rc.resolved["insertions"]["mu_boundary"][0][0] == {"re": 0.5, "im": 0.2}


def test_exit_status():
    assert cli.exit_status({"verdicts": [{"passed": True}]}) == cli.EXIT_PASS
    assert cli.exit_status({"verdicts": [{"passed": True}, {"passed": False}]}) == cli.EXIT_FAILED
    assert cli.exit_status({"verdicts": [], "error": {"type": "ConfigError"}}) == cli.EXIT_INVALID
    assert cli.exit_status({"verdicts": [], "error": {"type": "SeibergError"}}) == cli.EXIT_INVALID
    assert cli.exit_status({"verdicts": [], "error": {"type": "NumericError"}}) == cli.EXIT_NUMERIC


@pytest.mark.slow
def test_algebra_selftest_command(tmp_path):
    status = cli.main(["--output-dir", str(tmp_path), "algebra-selftest"])
    assert status == cli.EXIT_PASS
    report = _report(tmp_path, "algebra-selftest")
    assert report["exit_status"] == 0
    assert report["command"] == "algebra-selftest"
    assert report["config"]["engine"] == "symbolic"
    assert report["verdicts"] and all(v["passed"] for v in report["verdicts"])
    assert "rows" not in report


def test_ward_free_command(tmp_path):
    config = _write(tmp_path, {"engine": "symbolic", "symbolic": {"n_bulk": 1, "n_boundary": 1}})
    status = cli.main(["--output-dir", str(tmp_path), "ward-free", "--config", config,
                       "--level", "3", "--spin3", "--solve-weights"])
    assert status == cli.EXIT_PASS
    report = _report(tmp_path, "ward-free")
    assert report["results"]["level"] == 3
    assert len(report["verdicts"]) == 2
    assert report["results"]["derived"]


@pytest.mark.parametrize("extra", [["--level", "1"], ["--level", "2", "--spin3"]])
def test_ward_free_level_below_minimum_is_invalid(tmp_path, extra):
    config = _write(tmp_path, {"engine": "symbolic", "symbolic": {"n_bulk": 1, "n_boundary": 1}})
    status = cli.main(["--output-dir", str(tmp_path), "ward-free", "--config", config] + extra)
    assert status == cli.EXIT_INVALID
    report = _report(tmp_path, "ward-free")
    assert report["error"]["type"] == "ConfigError"
    assert "--level" in report["error"]["message"]
    assert report["verdicts"] == []


def test_ward_global_command(tmp_path):
    config = _write(tmp_path, {"engine": "symbolic", "symbolic": {"n_bulk": 1, "n_boundary": 1}})
    status = cli.main(["--output-dir", str(tmp_path), "ward-global", "--config", config])
    assert status == cli.EXIT_PASS
    report = _report(tmp_path, "ward-global")
    assert "error" not in report
    names = {v["name"] for v in report["verdicts"]}
    assert {"global-conformal-n0", "global-spin3-m4", "local-T", "local-W"} <= names
    assert any(name.startswith("decay-W-order") for name in names)


def test_engine_mismatch_is_invalid(tmp_path):
    config = _write(tmp_path, {"engine": "symbolic"})
    status = cli.main(["--output-dir", str(tmp_path), "mc-kpz", "--config", config])
    assert status == cli.EXIT_INVALID
    assert _report(tmp_path, "mc-kpz")["error"]["type"] == "ConfigError"


def test_bad_config_file_writes_an_error_report(tmp_path):
    config = _write(tmp_path, '{"engine": "mc", "gamma": 0.6,')
    status = cli.main(["--output-dir", str(tmp_path), "mc-correlator", "--config", config])
    assert status == cli.EXIT_INVALID
    report = _report(tmp_path, "mc-correlator")
    assert report["error"]["type"] == "ConfigError"
    assert report["exit_status"] == cli.EXIT_INVALID
    assert report["verdicts"] == []


def test_missing_config_file(tmp_path):
    status = cli.main(["--output-dir", str(tmp_path), "ward-global", "--config", str(tmp_path / "absent.json")])
    assert status == cli.EXIT_INVALID


def test_mc_correlator_writes_table(tmp_path):
    config = _write(tmp_path, MC_CONFIG)
    status = cli.main(["--output-dir", str(tmp_path), "mc-correlator", "--config", config])
    assert status == cli.EXIT_PASS
    report = _report(tmp_path, "mc-correlator")
    assert report["seed"] == 3
    assert {v["name"] for v in report["verdicts"]} == {"correlator-finite", "chaos-normalization"}
    table = tmp_path / "tables" / "mc-correlator.csv"
    assert table.exists()
    header = table.read_text(encoding="utf-8").splitlines()[0]
    assert header.split(",") == ["term", "chain", "value_re", "value_im", "stderr"]


def test_reports_are_reproducible(tmp_path):
    config = _write(tmp_path, MC_CONFIG)
    first, second = tmp_path / "a", tmp_path / "b"
    cli.main(["--output-dir", str(first), "mc-correlator", "--config", config])
    cli.main(["--output-dir", str(second), "mc-correlator", "--config", config])
    assert (first / "reports" / "mc-correlator.json").read_bytes() == \
        (second / "reports" / "mc-correlator.json").read_bytes()


def test_bad_mobius_argument(tmp_path):
    config = _write(tmp_path, MC_CONFIG)
    status = cli.main(["--output-dir", str(tmp_path), "mc-covariance", "--config", config, "--mobius", "1,0,1"])
    assert status == cli.EXIT_INVALID
