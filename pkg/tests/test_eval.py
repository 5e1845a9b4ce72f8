"""Tests for eval module."""

import csv
import math

import numpy as np
import pytest
from pydantic import ValidationError

from uapoint.common.config import EvalSettings, ProjectionSettings, TrainConfig
from uapoint.common.errors import DatasetError, EmptyInputError, PreconditionError, ShapeError
from uapoint.common.models import GapReport, ShiftSpec
from uapoint.eval import (
    STRATEGIES,
    ablation_view_strategies,
    bound_terms,
    encode_domain,
    export_pca,
    frechet_distance,
    gap_report,
    median_bandwidth,
    mmd_rbf,
    pca_2d,
    top1_accuracy,
)
from uapoint.pointcloud import generate_benchmark
from uapoint.training import train

from .helpers import TINY_IMAGE, TINY_VIEWS, render, tiny_settings


class TestMetrics:
    """Test accuracy, MMD and Fréchet distance."""

    def test_top1(self):
        """Test three of four matches give 0.75."""
        assert top1_accuracy([0, 1, 1, 0], [0, 1, 0, 0]) == 0.75
        with pytest.raises(ShapeError):
            top1_accuracy([0], [0, 1])
        with pytest.raises(EmptyInputError):
            top1_accuracy([], [])

    def test_mmd_singletons(self):
        """Test two single points give sqrt(2 (1 - exp(-d^2 / 2 sigma^2)))."""
        expected = math.sqrt(2.0 * (1.0 - math.exp(-25.0 / 8.0)))
        assert mmd_rbf([[0.0, 0.0]], [[3.0, 4.0]], bandwidth=2.0) == pytest.approx(expected, abs=1e-12)

    def test_mmd_identical(self):
        """Test identical samples have zero MMD."""
        x = np.random.default_rng(0).normal(size=(20, 4))
        assert mmd_rbf(x, x) == 0.0

    def test_median_bandwidth(self):
        """Test the median heuristic on a single pair is their distance."""
        assert median_bandwidth([[0.0, 0.0]], [[3.0, 4.0]]) == pytest.approx(5.0)
        assert median_bandwidth([[1.0, 1.0]], [[1.0, 1.0]]) == 1.0

    def test_frechet_mean_offset(self):
        """Test shifting a sample by m gives |m|^2."""
        x = np.random.default_rng(1).normal(size=(50, 3))
        offset = np.array([1.0, 2.0, 0.0])
        assert frechet_distance(x, x + offset) == pytest.approx(5.0, abs=1e-6)
        assert frechet_distance(x, x) == pytest.approx(0.0, abs=1e-6)

    def test_frechet_needs_two(self):
        """Test a single sample has no covariance."""
        with pytest.raises(PreconditionError):
            frechet_distance([[0.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]])


class TestGapReport:
    """Test the domain-gap report and the surrogate bound."""

    def encode(self, state, clouds, m_views: int = TINY_VIEWS):
        return encode_domain(state, clouds, render(clouds, m_views=m_views), rho=0.5)

    def test_terms_add_up(self, tiny_state, shifted_benchmark):
        """Test the total combines risk, half the OT term and beta times the prototype term."""
        source, target = shifted_benchmark
        labels = [ps.label for ps in source]
        report = gap_report(self.encode(tiny_state, source), labels, self.encode(tiny_state, target), 2)
        assert report.bound_total == pytest.approx(
            report.bound_source_risk + 0.5 * report.bound_ot_term + report.bound_proto_term
        )
        assert report.mmd >= 0.0 and report.frechet >= 0.0 and report.bound_ot_term >= 0.0

    def test_beta_zero(self, tiny_state, shifted_benchmark):
        """Test beta 0 drops the prototype term from the total."""
        source, target = shifted_benchmark
        labels = [ps.label for ps in source]
        cfg = EvalSettings(beta=0.0)
        report = gap_report(self.encode(tiny_state, source), labels, self.encode(tiny_state, target), 2, cfg)
        assert report.bound_total == pytest.approx(report.bound_source_risk + 0.5 * report.bound_ot_term)

    def test_identical_domains(self, tiny_state, tiny_benchmark):
        """Test identical domains have no MMD or OT gap."""
        source, target = tiny_benchmark
        labels = [ps.label for ps in source]
        report = gap_report(self.encode(tiny_state, source), labels, self.encode(tiny_state, target), 2)
        assert report.mmd == pytest.approx(0.0, abs=1e-9)
        assert report.bound_ot_term == pytest.approx(0.0, abs=1e-9)
        assert report.frechet == pytest.approx(0.0, abs=1e-6)

    def test_bound_terms(self, tiny_state, shifted_benchmark):
        """Test the bound from datasets uses the given beta and epsilon."""
        source, target = shifted_benchmark
        report = bound_terms(tiny_state, source, render(source), target, render(target), beta=0.0, epsilon=0.1)
        assert report.beta == 0.0
        assert report.bound_total == pytest.approx(report.bound_source_risk + 0.5 * report.bound_ot_term)
        assert 0.0 <= report.bound_source_risk <= 1.0

    def test_bound_terms_needs_labels(self, tiny_state, tiny_benchmark):
        """Test the source side of the bound must be labeled."""
        _, target = tiny_benchmark
        pixels = render(target)
        with pytest.raises(DatasetError):
            bound_terms(tiny_state, target, pixels, target, pixels, beta=1.0, epsilon=0.05)

    def test_inconsistent_total_rejected(self):
        """Test a report whose total disagrees with its terms does not validate."""
        with pytest.raises(ValidationError):
            GapReport(
                mmd=0.0,
                frechet=0.0,
                bound_source_risk=0.5,
                bound_ot_term=0.2,
                bound_proto_term=0.1,
                bound_total=1.0,
                beta=1.0,
            )

    @pytest.mark.slow
    def test_bound_falls_with_training(self):
        """Test adaptation lowers the surrogate bound on a rotated target."""
        source, target = generate_benchmark(2, 8, 128, ShiftSpec(rotation_angle=0.5, jitter_sigma=0.01), seed=2)
        cfg = TrainConfig(shots_per_class=8, epochs=10, batch_size=4, m_views=TINY_VIEWS, lr=0.05, seed=2)
        projection = ProjectionSettings(m_views=TINY_VIEWS, image_size=TINY_IMAGE)
        _, report = train(source, target, cfg, ["sphere", "cube"], model_cfg=tiny_settings(), projection=projection)
        assert report.epochs[-1].bound.bound_total < report.initial.gap.bound_total


class TestAblation:
    """Test view aggregation baselines."""

    def test_strategies(self, tiny_state, shifted_benchmark):
        """Test every strategy reports an accuracy."""
        _, target = shifted_benchmark
        encoded = encode_domain(tiny_state, target, render(target), rho=0.5)
        labels = [ps.reveal_label() for ps in target]
        accuracies = ablation_view_strategies(encoded, labels, seed=0)
        assert set(accuracies) == set(STRATEGIES)
        assert all(0.0 <= a <= 1.0 for a in accuracies.values())

    def test_single_view_all_equal(self, tiny_state, shifted_benchmark):
        """Test with one view every strategy makes the same prediction."""
        _, target = shifted_benchmark
        encoded = encode_domain(tiny_state, target, render(target, m_views=1), rho=0.5)
        labels = [ps.reveal_label() for ps in target]
        assert len(set(ablation_view_strategies(encoded, labels).values())) == 1


class TestPca:
    """Test the embedding export."""

    def test_export(self, tiny_state, tiny_benchmark, tmp_path):
        """Test one row per cloud with blank labels for unlabeled targets."""
        source, target = tiny_benchmark
        s = encode_domain(tiny_state, source, render(source), rho=0.5)
        t = encode_domain(tiny_state, target, render(target), rho=0.5)
        path = tmp_path / "pca.csv"
        export_pca(path, s.embeddings, [ps.label for ps in source], t.embeddings, [None] * len(target))
        with path.open(newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["domain", "label", "pc1", "pc2"]
        assert len(rows) == 1 + len(source) + len(target)
        assert rows[1][:2] == ["source", "0"]
        assert rows[-1][:2] == ["target", ""]

    def test_line(self):
        """Test collinear points have no second component."""
        coords = pca_2d(np.outer(np.arange(5.0), [1.0, 2.0, 2.0]))
        assert np.allclose(coords[:, 1], 0.0, atol=1e-12)
        assert np.allclose(np.abs(coords[:, 0]), 3.0 * np.abs(np.arange(5.0) - 2.0))

    def test_too_few(self):
        """Test one embedding cannot be projected."""
        with pytest.raises(PreconditionError):
            pca_2d(np.zeros((1, 3)))


@pytest.mark.slow
class TestDomainGapTrend:
    """Test the domain gap after full training on the standard benchmark."""

    def test_mmd_and_frechet_fall(self, standard_runs):
        """Test MMD and the Frechet distance end below their initial values in four of five seeds."""
        lower = [
            run.full.epochs[-1].mmd < run.full.initial.gap.mmd
            and run.full.epochs[-1].frechet < run.full.initial.gap.frechet
            for run in standard_runs
        ]
        assert sum(lower) >= 4

    def test_bound_falls(self, standard_runs):
        """Test the bound surrogate ends below its initial value in four of five seeds."""
        lower = [run.full.epochs[-1].bound.bound_total < run.full.initial.gap.bound_total for run in standard_runs]
        assert sum(lower) >= 4
