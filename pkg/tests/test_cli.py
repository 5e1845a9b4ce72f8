"""Tests for cli module."""

import io
import json
import sys

import numpy as np
import pytest

from uapoint.cli import run
from uapoint.common.logging import configure_logging, get_logger

TINY_MODEL = ["--embed-dim", "8", "--lora-rank", "2", "--image-size", "16", "--m-views", "3"]


def synth(out, *extra: str) -> int:
    args = ["synth", "--classes", "2", "--samples-per-class", "3", "--points", "64", "-o", str(out)]
    return run(args + list(extra))


def stdout_lines(capsys) -> list:
    return [line for line in capsys.readouterr().out.splitlines() if line]


class TestCommands:
    """Test individual commands."""

    def test_help(self):
        """Test the help screen exits cleanly."""
        assert run(["--help"]) == 0
        assert run(["sinkhorn", "--help"]) == 0

    def test_synth_deterministic(self, tmp_path):
        """Test the same seed writes identical datasets."""
        assert synth(tmp_path / "a", "--rotation-angle", "0.5", "--seed", "4") == 0
        assert synth(tmp_path / "b", "--rotation-angle", "0.5", "--seed", "4") == 0
        manifest = json.loads((tmp_path / "a" / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["classes"] == ["sphere", "cube"]
        assert len(manifest["samples"]) == 12
        assert (tmp_path / "a" / "manifest.json").read_bytes() == (tmp_path / "b" / "manifest.json").read_bytes()
        for entry in manifest["samples"]:
            a = (tmp_path / "a" / entry["path"]).read_bytes()
            assert a == (tmp_path / "b" / entry["path"]).read_bytes()
            if entry["domain"] == "target":
                assert entry["label"] is None
                assert entry["hidden_label"] in (0, 1)
                assert not a.startswith(b"#")
        assert (tmp_path / "a" / "run.json").exists()

    def test_project(self, tmp_path):
        """Test one PGM per sample and view."""
        synth(tmp_path / "data")
        out = tmp_path / "views"
        code = run(
            ["project", "--manifest", str(tmp_path / "data" / "manifest.json"), "--m-views", "4", "--image-size", "16",
             "--domain", "target", "-o", str(out)]
        )
        assert code == 0
        files = sorted((out / "views" / "target").glob("*.pgm"))
        assert len(files) == 6 * 4
        assert files[0].read_bytes()[:2] == b"P5"

    def test_sinkhorn_outer_product(self, tmp_path, capsys):
        """Test a zero cost matrix prints the independent coupling and its objectives."""
        cost = tmp_path / "cost.csv"
        cost.write_text("0,0\n0,0\n0,0\n", encoding="utf-8")
        marginals = tmp_path / "marginals.csv"
        marginals.write_text("0.2,0.3,0.5\n0.4,0.6\n", encoding="utf-8")
        code = run(["sinkhorn", "--cost", str(cost), "--marginals", str(marginals), "-o", str(tmp_path / "out")])
        assert code == 0
        lines = stdout_lines(capsys)
        plan = np.array([[float(v) for v in line.split(",")] for line in lines[:3]])
        assert np.allclose(plan, np.outer([0.2, 0.3, 0.5], [0.4, 0.6]), atol=1e-12)
        summary = json.loads(lines[3])
        assert summary["converged"] is True
        assert summary["cost"] == 0.0
        assert summary["marginal_violation"] < 1e-9

    def test_sinkhorn_uniform(self, tmp_path, capsys):
        """Test a swap cost matrix puts the mass on the diagonal."""
        cost = tmp_path / "cost.csv"
        cost.write_text("0,1\n1,0\n", encoding="utf-8")
        assert run(["sinkhorn", "--cost", str(cost), "--epsilon", "0.01", "-o", str(tmp_path / "out")]) == 0
        lines = stdout_lines(capsys)
        assert float(lines[0].split(",")[0]) == pytest.approx(0.5, abs=1e-6)
        assert json.loads(lines[2])["cost"] < 0.01


class TestExitCodes:
    """Test error reporting."""

    def test_parameter_error(self, tmp_path):
        """Test invalid parameters exit with 1."""
        assert run(["synth", "--classes", "11", "-o", str(tmp_path)]) == 1
        assert run(["synth", "--rotation-axis", "0,0", "-o", str(tmp_path)]) == 1
        assert run(["synth", "--no-such-flag"]) == 1

    def test_missing_manifest(self, tmp_path):
        """Test a missing dataset exits with 2."""
        assert run(["project", "--manifest", str(tmp_path / "none.json"), "-o", str(tmp_path / "out")]) == 2

    def test_bad_cost_matrix(self, tmp_path):
        """Test unparsable and ragged matrices exit with 2."""
        cost = tmp_path / "cost.csv"
        cost.write_text("0,1\n1,x\n", encoding="utf-8")
        assert run(["sinkhorn", "--cost", str(cost), "-o", str(tmp_path / "out")]) == 2
        cost.write_text("0,1\n1\n", encoding="utf-8")
        assert run(["sinkhorn", "--cost", str(cost), "-o", str(tmp_path / "out")]) == 2

    def test_non_finite_cost(self, tmp_path):
        """Test a non-finite cost exits with 3."""
        cost = tmp_path / "cost.csv"
        cost.write_text("0,nan\n1,0\n", encoding="utf-8")
        assert run(["sinkhorn", "--cost", str(cost), "-o", str(tmp_path / "out")]) == 3

    def test_bad_config(self, tmp_path):
        """Test unknown config keys are parameter errors."""
        synth(tmp_path / "data")
        config = tmp_path / "config.toml"
        config.write_text("[model]\nno_such_key = 3\n", encoding="utf-8")
        code = run(
            ["train", "--manifest", str(tmp_path / "data" / "manifest.json"), "-c", str(config), "-o", str(tmp_path / "out")]
        )
        assert code == 1


@pytest.mark.integration
class TestPipeline:
    """Test synth, train, eval, bound and inspect end to end."""

    def test_end_to_end(self, tmp_path, capsys):
        """Test every command consumes the previous command's files."""
        data, out = tmp_path / "data", tmp_path / "run"
        assert synth(data, "--rotation-angle", "0.4", "--jitter", "0.01") == 0
        manifest = str(data / "manifest.json")
        config = tmp_path / "config.toml"
        config.write_text("epochs = 1\n[model]\ntoken_dim = 8\npoint_hidden = 8\nquery_length = 2\nheads = 2\n", encoding="utf-8")

        code = run(
            ["train", "--manifest", manifest, "--shots", "2", "--batch-size", "2", "-c", str(config), "-o", str(out)]
            + TINY_MODEL
        )
        assert code == 0
        run_record = json.loads((out / "run.json").read_text(encoding="utf-8"))
        assert run_record["command"] == "train"
        assert run_record["parameters"]["model"]["token_dim"] == 8
        assert run_record["parameters"]["train"]["epochs"] == 1
        assert len((out / "report.jsonl").read_text(encoding="utf-8").splitlines()) == 1
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert summary["target_label_reads"] == 0
        checkpoint = str(out / "model.ckpt")
        capsys.readouterr()

        code = run(
            ["eval", "--manifest", manifest, "--checkpoint", checkpoint, "--m-views", "3", "--ablation", "views",
             "--export-pca", str(out / "pca.csv"), "-o", str(out / "eval")]
        )
        assert code == 0
        snapshot = json.loads(stdout_lines(capsys)[-1])
        assert 0.0 <= snapshot["target_accuracy"] <= 1.0
        assert (out / "eval" / "gap_report.json").exists()
        ablation = (out / "eval" / "ablation_views.csv").read_text(encoding="utf-8").splitlines()
        assert ablation[0] == "strategy,accuracy"
        assert len(ablation) == 6
        assert len((out / "pca.csv").read_text(encoding="utf-8").splitlines()) == 13

        code = run(
            ["bound", "--manifest", manifest, "--checkpoint", checkpoint, "--m-views", "3", "--beta", "0",
             "-o", str(out / "bound")]
        )
        assert code == 0
        report = json.loads(stdout_lines(capsys)[-1])
        assert report["beta"] == 0.0
        assert report["bound_total"] == pytest.approx(report["bound_source_risk"] + 0.5 * report["bound_ot_term"])

        code = run(
            ["inspect", "--manifest", manifest, "--checkpoint", checkpoint, "--m-views", "3", "--index", "1",
             "-o", str(out / "inspect")]
        )
        assert code == 0
        lines = stdout_lines(capsys)
        assert lines[0] == "view,entropy,selected,predicted_class"
        assert len(lines) == 4
        assert any(line.split(",")[2] == "1" for line in lines[1:])


class TestLogging:
    """Test the logging setup."""

    def test_stderr_looked_up_per_record(self, monkeypatch):
        """Test records follow sys.stderr when it is replaced after configuration."""
        configure_logging("INFO", "text")
        logger = get_logger("uapoint.tests")
        first, second = io.StringIO(), io.StringIO()
        monkeypatch.setattr(sys, "stderr", first)
        logger.info("Loaded dataset", source=3)
        monkeypatch.setattr(sys, "stderr", second)
        logger.warning("Skipping batch", reason="non-finite loss")
        assert "Loaded dataset" in first.getvalue()
        assert "Skipping batch" in second.getvalue()
        assert "Skipping batch" not in first.getvalue()
