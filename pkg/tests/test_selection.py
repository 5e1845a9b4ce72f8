"""Tests for selection module."""

import math

import numpy as np
import pytest
import torch

from uapoint.common.config import ProjectionSettings
from uapoint.common.errors import ParameterError, PreconditionError
from uapoint.eval import ablation_view_strategies, encode_domain
from uapoint.model import cloud_prompts
from uapoint.numerics import DTYPE
from uapoint.projection import camera_rig, corrupt_views, project_all
from uapoint.selection import aggregate, predict_batch, predict_cloud, predictive_entropy, pseudo_argmax, select_views

from .helpers import STANDARD_VIEWS, TINY_IMAGE, render


class TestEntropy:
    """Test predictive entropy."""

    def test_uniform(self):
        """Test ten uniform classes give ln 10."""
        assert float(predictive_entropy([0.1] * 10)) == pytest.approx(math.log(10.0), abs=1e-12)

    def test_one_hot(self):
        """Test a one-hot vector has zero entropy."""
        assert float(predictive_entropy([0.0, 1.0, 0.0])) == 0.0

    def test_batched(self):
        """Test entropy is taken over the last axis."""
        h = predictive_entropy([[0.5, 0.5], [1.0, 0.0]])
        assert h.shape == (2,)
        assert float(h[0]) == pytest.approx(math.log(2.0))


class TestSelectViews:
    """Test percentile view selection."""

    def test_half(self):
        """Test rho 0.5 keeps the two least uncertain of four views."""
        assert select_views([0.1, 0.9, 0.5, 0.2], 0.5) == [0, 3]

    def test_all(self):
        """Test rho 1 keeps every view."""
        assert select_views([0.4, 0.1, 0.3], 1.0) == [0, 1, 2]

    def test_ties_included(self):
        """Test views tied with the threshold are kept."""
        assert select_views([0.3, 0.3, 0.3], 0.1) == [0, 1, 2]

    def test_single_view(self):
        """Test one view is always selected."""
        assert select_views([2.0], 0.01) == [0]

    def test_nested_in_rho(self):
        """Test a larger percentile selects a superset."""
        entropies = [0.7, 0.2, 0.9, 0.4, 0.1, 0.6, 0.3, 0.8, 0.5, 0.05]
        previous: set = set()
        for rho in (0.1, 0.3, 0.5, 0.7, 1.0):
            selected = set(select_views(entropies, rho))
            assert previous <= selected
            assert len(selected) == math.ceil(rho * 10)
            previous = selected

    def test_invalid(self):
        """Test empty input and out-of-range rho are rejected."""
        with pytest.raises(PreconditionError):
            select_views([], 0.5)
        with pytest.raises(ParameterError):
            select_views([0.1], 0.0)
        with pytest.raises(ParameterError):
            select_views([0.1], 1.5)


class TestAggregate:
    """Test confident aggregation."""

    def test_mean(self):
        """Test [1,0] and [0,1] average to [0.5,0.5]."""
        out = aggregate([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]], [0, 1])
        assert torch.allclose(out, torch.tensor([0.5, 0.5], dtype=DTYPE))

    def test_invalid_selection(self):
        """Test empty and out-of-range selections are rejected."""
        with pytest.raises(PreconditionError):
            aggregate([[1.0, 0.0]], [])
        with pytest.raises(PreconditionError):
            aggregate([[1.0, 0.0]], [1])

    def test_pseudo_argmax_ties(self):
        """Test ties go to the lowest index."""
        assert pseudo_argmax(torch.tensor([0.4, 0.4, 0.2])) == 0


class TestPredict:
    """Test per-cloud prediction."""

    def test_predict_cloud(self, tiny_state, tiny_benchmark):
        """Test probabilities, selection and aggregate are consistent."""
        ps = tiny_benchmark[0][0]
        vs = project_all(ps, camera_rig(4, 2.0, image_size=TINY_IMAGE))
        _, prompts = cloud_prompts(tiny_state, [ps])
        pred = predict_cloud(vs, tiny_state, prompts[0], rho=0.5)
        assert pred.per_view_probs.shape == (4, 2)
        assert torch.allclose(pred.per_view_probs.sum(dim=1), torch.ones(4, dtype=DTYPE), atol=1e-12)
        assert pred.selected == select_views(pred.per_view_entropy, 0.5)
        assert torch.allclose(pred.aggregated, pred.per_view_probs[pred.selected].mean(dim=0))
        assert pred.prediction == pseudo_argmax(pred.aggregated)
        assert float(torch.linalg.vector_norm(pred.cloud_embedding)) == pytest.approx(1.0, abs=1e-12)

    def test_fixed_selections(self, tiny_state, tiny_benchmark):
        """Test fixed selections bypass the entropy rule."""
        pixels = torch.from_numpy(render(tiny_benchmark[0][:2])).to(DTYPE)
        preds = predict_batch(pixels, None, tiny_state, rho=0.5, selections=[[2], [0, 1]])
        assert [p.selected for p in preds] == [[2], [0, 1]]
        assert torch.equal(preds[0].aggregated, preds[0].per_view_probs[2])

    def test_entropy_detached(self, tiny_state, tiny_benchmark):
        """Test per-view entropies carry no gradient."""
        pixels = torch.from_numpy(render(tiny_benchmark[0][:1])).to(DTYPE)
        pred = predict_batch(pixels, None, tiny_state, rho=0.5)[0]
        assert not pred.per_view_entropy.requires_grad
        assert pred.aggregated.requires_grad


@pytest.mark.slow
class TestCorruptedViews:
    """Test selection on trained models when half of the target views are blank."""

    def corrupted(self, run, fraction: float = 0.5):
        projection = ProjectionSettings()
        cams = camera_rig(STANDARD_VIEWS, projection.distance, projection.fov_degrees, projection.image_size)
        return [corrupt_views(project_all(ps, cams), fraction, run.seed, index=i) for i, ps in enumerate(run.target)]

    def test_entropy_guided_beats_random_view(self, standard_runs):
        """Test entropy-guided accuracy is never below a random single view and higher on average."""
        guided, single = [], []
        for run in standard_runs:
            pixels = np.stack([vs.as_array() for vs in self.corrupted(run)])
            encoded = encode_domain(run.state, run.target, pixels, rho=0.5)
            labels = [ps.reveal_label() for ps in run.target]
            accuracies = ablation_view_strategies(encoded, labels, seed=run.seed)
            guided.append(accuracies["entropy_guided"])
            single.append(accuracies["random"])
        assert all(g >= r for g, r in zip(guided, single))
        assert sum(guided) > sum(single)

    def test_blank_views_not_selected(self, standard_runs):
        """Test background-only views fall outside the selected set."""
        run = standard_runs[0]
        view_sets = self.corrupted(run)
        with torch.no_grad():
            _, prompts = cloud_prompts(run.state, run.target)
            preds = [predict_cloud(vs, run.state, prompts[i], rho=0.5) for i, vs in enumerate(view_sets)]
        assert all(len(vs.corrupted) == STANDARD_VIEWS // 2 for vs in view_sets)
        excluded = sum(set(pred.selected).isdisjoint(vs.corrupted) for pred, vs in zip(preds, view_sets))
        assert excluded >= 0.9 * len(view_sets)
