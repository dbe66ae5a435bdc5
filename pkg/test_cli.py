import dataclasses
import json
from pathlib import Path

import pytest

import presets
from cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from config import load_scenario, scenario_to_dict
from storage import REPORT_HEADER

CONFIGS = Path(__file__).parent / "configs"


def write_experiment(tmp_path, scenario, estimators=("raw", "full_noise"), dims=(16, 32)) -> Path:
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps({
        "scenario_id": "cli-test",
        "scenario": scenario_to_dict(scenario),
        "dims": list(dims),
        "trials": 2,
        "estimators": list(estimators),
        "output_path": str(tmp_path / "from-config.csv"),
    }), encoding="utf-8")
    return path


@pytest.mark.parametrize("preset", sorted(presets.PRESETS))
def test_generate_writes_loadable_scenario(tmp_path, preset):
    out = tmp_path / f"{preset}.json"
    assert main(["--plain-logs", "generate", "--preset", preset, "--out", str(out), "--seed", "3"]) == EXIT_OK
    assert load_scenario(out) == presets.PRESETS[preset](seed=3)


def test_run_then_summarize(tmp_path, capsys):
    config = write_experiment(tmp_path, presets.fully_noisy(seed=1))
    report = tmp_path / "report.csv"
    assert main(["--plain-logs", "run", "--config", str(config), "--out", str(report), "--workers", "2"]) == EXIT_OK
    lines = report.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(REPORT_HEADER)
    assert len(lines) == 1 + 2 * 2 * 2

    summary_csv = tmp_path / "summary.csv"
    capsys.readouterr()
    assert main(["--plain-logs", "summarize", "--in", str(report), "--csv", str(summary_csv)]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "full_noise" in printed and "slope" in printed
    assert len(summary_csv.read_text(encoding="utf-8").splitlines()) == 1 + 2 * 2


def test_run_defaults_to_config_output_path(tmp_path):
    config = write_experiment(tmp_path, presets.fully_noisy())
    assert main(["--plain-logs", "run", "--config", str(config)]) == EXIT_OK
    assert (tmp_path / "from-config.csv").exists()


def test_check_assumptions(capsys):
    code = main(["--plain-logs", "check-assumptions", "--config", str(CONFIGS / "fully-noisy.json"),
                 "--d", "100", "--d", "1000", "--trials", "2"])
    assert code == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert "signal_noise_dev" in out[0]
    assert len(out) == 3


def test_config_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scenario_path": "missing.json", "dims": [10]}), encoding="utf-8")
    assert main(["--plain-logs", "run", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["--plain-logs", "summarize", "--in", str(tmp_path / "nope.csv")]) == EXIT_CONFIG


def test_run_where_everything_fails_exits_3(tmp_path):
    scenario = dataclasses.replace(presets.full_rank_bias(), gamma=1e-3)
    config = write_experiment(tmp_path, scenario, estimators=("full_noise",), dims=(50,))
    out = tmp_path / "failed.csv"
    assert main(["--plain-logs", "run", "--config", str(config), "--out", str(out)]) == EXIT_NUMERICAL
    assert out.read_text(encoding="utf-8").splitlines()[1].endswith(",debias_undefined")


def test_unknown_preset_is_rejected_by_argparse(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main(["generate", "--preset", "nonsense", "--out", str(tmp_path / "x.json")])
    assert excinfo.value.code == 2
