import hashlib
import json

import pytest

from fuzzprobe.errors import ConfigurationError, StageError
from fuzzprobe.pipeline import (
    default_config_path,
    load_config,
    parse_config,
    run_pipeline,
    validate,
    verify_manifest,
)


def small_config(tmp_path, **overrides):
    """A fast oracle config: 2 units, 21 temperatures, 2 locations, 2 categories."""
    warm = {"kind": "generalized-bell", "a": 10, "b": 2, "c": 5}
    hot = {"kind": "hedged", "base": warm, "exponent": 2}
    doc = {
        "stimuli": {
            "units": ["none", "celsius"],
            "ranges": {"none": [-10, 10], "celsius": [-10, 10]},
            "locations": ["", "outside"],
            "categories": ["warm", "hot"],
        },
        "scorer": {
            "kind": "oracle",
            "seed": 7,
            "noise_sigma": 0.03,
            "memberships": {
                "none": {"warm": warm, "hot": hot},
                "celsius": {"warm": warm, "hot": hot},
            },
        },
        "smoother": {"lambda_count": 8},
        "analysis": {"lambda_count": 50},
        "output": {"directory": str(tmp_path / "artifacts")},
    }
    doc.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc, indent=2))
    return path, doc


class TestValidate:
    def test_default_shipped_config_is_clean(self):
        assert validate(default_config_path()) == []

    def test_small_config_is_clean(self, tmp_path):
        path, _ = small_config(tmp_path)
        assert validate(path) == []

    def test_missing_scorer_section(self, tmp_path):
        path, doc = small_config(tmp_path)
        del doc["scorer"]
        path.write_text(json.dumps(doc))
        diagnostics = validate(path)
        assert len(diagnostics) == 1
        assert diagnostics[0].path == "scorer"
        assert "missing" in diagnostics[0].message

    def test_descending_exponent_range(self, tmp_path):
        path, doc = small_config(tmp_path)
        doc["analysis"]["lambda_range"] = [8, 1]
        path.write_text(json.dumps(doc))
        diagnostics = validate(path)
        assert len(diagnostics) == 1
        assert "descending" in diagnostics[0].message

    def test_descending_celsius_range(self, tmp_path):
        path, doc = small_config(tmp_path)
        doc["stimuli"]["ranges"]["celsius"] = [50, -50]
        path.write_text(json.dumps(doc))
        diagnostics = validate(path)
        assert len(diagnostics) == 1
        assert "celsius" in str(diagnostics[0])

    def test_multiple_problems_collected(self, tmp_path):
        path, doc = small_config(tmp_path)
        doc["analysis"]["lambda_range"] = [8, 1]
        doc["smoother"]["lambda_min"] = -1
        del doc["scorer"]
        path.write_text(json.dumps(doc))
        assert len(validate(path)) == 3

    def test_oracle_coverage_gap_flagged(self, tmp_path):
        path, doc = small_config(tmp_path)
        del doc["scorer"]["memberships"]["celsius"]["hot"]
        path.write_text(json.dumps(doc))
        diagnostics = validate(path)
        assert len(diagnostics) == 1
        assert "hot" in diagnostics[0].message

    def test_unreadable_file_raises(self, tmp_path):
        with pytest.raises(ConfigurationError, match="cannot read"):
            validate(tmp_path / "nope.json")

    def test_invalid_json_raises(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{")
        with pytest.raises(ConfigurationError, match="not valid JSON"):
            validate(path)


class TestParseConfig:
    def test_endpoint_env_override(self, tmp_path):
        path, doc = small_config(tmp_path)
        doc["scorer"] = {"kind": "remote", "endpoint": "http://configured:1"}
        path.write_text(json.dumps(doc))
        config = parse_config(load_config(path), env={"FUZZPROBE_ENDPOINT": "http://env:2"})
        assert config.remote.endpoint == "http://env:2"

    def test_remote_without_endpoint_rejected(self, tmp_path):
        path, doc = small_config(tmp_path)
        doc["scorer"] = {"kind": "remote"}
        path.write_text(json.dumps(doc))
        with pytest.raises(ConfigurationError, match="endpoint"):
            parse_config(load_config(path), env={})

    def test_unknown_scorer_kind_rejected(self, tmp_path):
        path, doc = small_config(tmp_path)
        doc["scorer"] = {"kind": "psychic"}
        path.write_text(json.dumps(doc))
        with pytest.raises(ConfigurationError, match="psychic"):
            parse_config(load_config(path))


class TestRunPipeline:
    def test_artifacts_written(self, tmp_path):
        path, doc = small_config(tmp_path)
        result = run_pipeline(path)
        directory = result.directory
        for name in ("pairs.jsonl", "scores.jsonl", "curves.jsonl", "report.json", "manifest.json"):
            assert (directory / name).exists(), name
        plots = sorted(p.name for p in (directory / "plots").iterdir())
        assert "hedge_exponents.svg" in plots
        assert "curves_none.svg" in plots and "curves_celsius.svg" in plots
        pairs = (directory / "pairs.jsonl").read_text().splitlines()
        assert len(pairs) == 21 * 2 * 2 * 2

    def test_manifest_digests_verify(self, tmp_path):
        path, _ = small_config(tmp_path)
        result = run_pipeline(path)
        assert verify_manifest(result.directory) == []
        # tamper and re-verify
        report = result.directory / "report.json"
        report.write_text(report.read_text() + " ")
        problems = verify_manifest(result.directory)
        assert problems == ["report.json: digest mismatch"]

    def test_rerun_is_byte_identical_except_timestamps(self, tmp_path):
        path, _ = small_config(tmp_path)
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        run_pipeline(path, out_dir=out_a)
        run_pipeline(path, out_dir=out_b)
        files_a = sorted(p.relative_to(out_a) for p in out_a.rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(out_b) for p in out_b.rglob("*") if p.is_file())
        assert files_a == files_b
        for rel in files_a:
            if rel.name == "manifest.json":
                a = json.loads((out_a / rel).read_text())
                b = json.loads((out_b / rel).read_text())
                a.pop("created_at"), b.pop("created_at")
                assert a == b
            else:
                assert (out_a / rel).read_bytes() == (out_b / rel).read_bytes(), rel

    def test_stage_failure_names_stage_and_keeps_artifacts(self, tmp_path):
        path, doc = small_config(tmp_path)
        # 6 temperatures per curve is below the smoother's minimum of 10
        doc["stimuli"]["ranges"] = {"none": [0, 5], "celsius": [0, 5]}
        path.write_text(json.dumps(doc))
        with pytest.raises(StageError) as excinfo:
            run_pipeline(path)
        assert excinfo.value.stage == "smooth"
        directory = tmp_path / "artifacts"
        assert (directory / "pairs.jsonl").exists()
        assert (directory / "scores.jsonl").exists()
        assert not (directory / "curves.jsonl").exists()

    def test_report_content_sane(self, tmp_path):
        path, _ = small_config(tmp_path)
        result = run_pipeline(path)
        report = json.loads((result.directory / "report.json").read_text())
        assert report["fit_mode"] == "smoothed"
        # hot was generated as warm^2: the fit should land near 2
        for unit in ("none", "celsius"):
            assert abs(report["hedge_fits"][unit]["lambda_star"] - 2.0) < 0.5
        assert set(report["cross_condition_rmse"]) == {"none_vs_celsius"}
