import json
from pathlib import Path

import pytest

from holder_hj.cli import ConfigError, ExperimentConfig, config_from_dict, load_config, main
from holder_hj.experiments import SummaryRow, emit_report, write_summary

SMALL = {
    "experiment": "conjugates",
    "seed": 11,
    "conjugate_trials": 4,
    "conjugate_probes": 3,
    "oracle_samples": 501,
}


def write_config(tmp_path: Path, payload: dict) -> Path:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload))
    return path


class TestConfig:
    def test_defaults_valid(self):
        config = ExperimentConfig()
        assert config.experiment == "full-suite"

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys: frobnicate"):
            config_from_dict({"experiment": "conjugates", "frobnicate": 1})

    def test_unknown_experiment_rejected(self):
        with pytest.raises(ConfigError, match="unknown experiment"):
            config_from_dict({"experiment": "nope"})

    def test_invalid_numeric_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"experiment": "bridge", "dt": -1.0})
        with pytest.raises(ConfigError):
            config_from_dict({"experiment": "bridge", "p": 2.5})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.json")

    def test_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(path)


class TestSummaryRow:
    def test_abs_kind(self):
        assert SummaryRow("x", 1.0, 1.0005, 1e-3).passed
        assert not SummaryRow("x", 1.0, 1.01, 1e-3).passed

    def test_lower_kind(self):
        assert SummaryRow("x", 0.0, 0.5, 0.0, kind="lower").passed
        assert not SummaryRow("x", 0.0, -0.5, 0.0, kind="lower").passed

    def test_upper_kind(self):
        assert SummaryRow("x", 4.0, 3.0, 0.0, kind="upper").passed
        assert not SummaryRow("x", 4.0, 4.5, 0.0, kind="upper").passed

    def test_nan_fails(self):
        assert not SummaryRow("x", 0.0, float("nan"), 1.0).passed


class TestMain:
    def test_run_conjugates_exit_zero(self, tmp_path):
        config = write_config(tmp_path, SMALL)
        out = tmp_path / "artifacts"
        assert main(["run", "--config", str(config), "--out", str(out)]) == 0
        summary = (out / "summary.csv").read_text().splitlines()
        assert summary[0] == "check,expected,measured,tolerance,pass"
        assert any(line.startswith("c_plus_q2_d1,0.25,0.25,1e-12,pass") for line in summary)

    def test_config_error_exit_two(self, tmp_path):
        config = write_config(tmp_path, {"experiment": "bogus"})
        assert main(["run", "--config", str(config), "--out", str(tmp_path / "x")]) == 2

    def test_missing_out_dir_exit_two(self, tmp_path):
        config = write_config(tmp_path, SMALL)
        assert main(["run", "--config", str(config)]) == 2

    def test_seed_override_changes_manifest(self, tmp_path):
        config = write_config(tmp_path, SMALL)
        out = tmp_path / "a"
        main(["run", "--config", str(config), "--out", str(out), "--seed", "99"])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 99
        assert "out_dir" not in manifest

    def test_rerun_same_seed_byte_identical(self, tmp_path):
        config = write_config(tmp_path, SMALL)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(config), "--out", str(out_a)])
        main(["run", "--config", str(config), "--out", str(out_b)])
        for name in ("summary.csv", "conjugates.csv", "manifest.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_report_roundtrip(self, tmp_path):
        config = write_config(tmp_path, SMALL)
        out = tmp_path / "artifacts"
        main(["run", "--config", str(config), "--out", str(out)])
        assert main(["report", "--dir", str(out)]) == 0
        first = (out / "report.txt").read_bytes()
        assert main(["report", "--dir", str(out)]) == 0
        assert (out / "report.txt").read_bytes() == first

    def test_report_missing_summary_exit_two(self, tmp_path):
        assert main(["report", "--dir", str(tmp_path)]) == 2


class TestEmitReport:
    def test_header_only_for_empty_summary(self, tmp_path):
        write_summary([], tmp_path / "summary.csv")
        text = emit_report(tmp_path)
        lines = text.splitlines()
        assert len(lines) == 2  # header + rule
        assert lines[0].startswith("check")

    def test_lists_every_row(self, tmp_path):
        rows = [
            SummaryRow("alpha", 1.0, 1.0, 0.1),
            SummaryRow("beta", 0.0, -1.0, 0.0, kind="lower"),
        ]
        write_summary(rows, tmp_path / "summary.csv")
        text = emit_report(tmp_path)
        assert "alpha" in text and "beta" in text
        assert "fail" in text
