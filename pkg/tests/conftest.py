"""Shared fixtures: tiny model states, benchmarks and training configs."""

from typing import List

import pytest

from uapoint.common.config import TrainConfig
from uapoint.common.models import ShiftSpec
from uapoint.model import ModelState
from uapoint.pointcloud import PointSet, generate_benchmark

from .helpers import STANDARD_SEEDS, TINY_VIEWS, StandardRun, make_state, standard_run


@pytest.fixture
def tiny_state() -> ModelState:
    """Two-class model state with tiny dimensions."""
    return make_state()


@pytest.fixture
def tiny_benchmark() -> tuple[List[PointSet], List[PointSet]]:
    """Two classes, four samples each, no shift."""
    return generate_benchmark(2, 4, 64, ShiftSpec(), seed=0)


@pytest.fixture
def shifted_benchmark() -> tuple[List[PointSet], List[PointSet]]:
    """Two classes, four samples each, rotated, jittered and thinned target."""
    shift = ShiftSpec(rotation_angle=0.6, jitter_sigma=0.02, dropout_ratio=0.25)
    return generate_benchmark(2, 4, 64, shift, seed=3)


@pytest.fixture
def tiny_train_config() -> TrainConfig:
    """Short training run on the tiny benchmark."""
    return TrainConfig(shots_per_class=2, epochs=2, batch_size=2, m_views=TINY_VIEWS, lr=0.01, seed=0)


@pytest.fixture(scope="session")
def standard_runs() -> List[StandardRun]:
    """Standard benchmark trained with and without the alignment losses, five seeds."""
    return [standard_run(seed) for seed in STANDARD_SEEDS]
