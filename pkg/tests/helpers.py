"""Builders shared by the test modules."""

from typing import List, NamedTuple, Sequence

import numpy as np
import torch

from uapoint.common.config import ModelSettings, TrainConfig
from uapoint.common.models import ShiftSpec, TrainReport
from uapoint.model import HashedKnowledgeSource, ModelState
from uapoint.pointcloud import PointSet, generate_benchmark, get_shapes
from uapoint.projection import camera_rig, render_dataset
from uapoint.training import train

TINY_IMAGE = 16
TINY_VIEWS = 3

STANDARD_SEEDS = range(5)
STANDARD_VIEWS = 6
STANDARD_SHIFT = ShiftSpec(rotation_angle=0.5, jitter_sigma=0.01)
STANDARD_CLASSES = [shape.name for shape in get_shapes(5)]


def tiny_settings(**overrides: object) -> ModelSettings:
    """Model settings small enough for exhaustive gradient checks."""
    values = dict(
        embed_dim=8,
        token_dim=8,
        point_hidden=8,
        query_length=2,
        heads=2,
        lora_rank=2,
        temperature=0.5,
        image_size=TINY_IMAGE,
        patch_size=8,
        init_seed=0,
    )
    values.update(overrides)
    return ModelSettings(**values)


def make_state(classes: Sequence[str] = ("sphere", "cube"), **overrides: object) -> ModelState:
    cfg = tiny_settings(**overrides)
    knowledge = HashedKnowledgeSource(cfg.embed_dim).load(list(classes))
    return ModelState(cfg, list(classes), knowledge)


def render(clouds: Sequence[PointSet], m_views: int = TINY_VIEWS, image_size: int = TINY_IMAGE) -> np.ndarray:
    return render_dataset(clouds, camera_rig(m_views, 2.0, 60.0, image_size))


def randomize_adapters(state: ModelState, seed: int = 1, scale: float = 0.1) -> None:
    """Give the zero-initialised adapter up-projections random values."""
    rng = np.random.default_rng(seed)
    with torch.no_grad():
        for name in ("patch_b", "head_b", "text_b"):
            param = getattr(state, name)
            param.copy_(torch.from_numpy(rng.normal(0.0, scale, size=tuple(param.shape))))


def sharpen_prompts(state: ModelState, scale: float = 4.0) -> None:
    """Scale the visual prompt queries and values so attention gradients sit well above round-off."""
    with torch.no_grad():
        state.query.mul_(scale)
        state.w_v_vis.mul_(scale)


class StandardRun(NamedTuple):
    """Full-loss and ce+ortho-only training on one seed of the standard benchmark."""

    seed: int
    source: List[PointSet]
    target: List[PointSet]
    state: ModelState
    full: TrainReport
    baseline: TrainReport


def standard_run(seed: int, epochs: int = 20) -> StandardRun:
    """Five classes, 16 shots, 512 points, six views, default model settings."""
    source, target = generate_benchmark(len(STANDARD_CLASSES), 16, 512, STANDARD_SHIFT, seed=seed)
    cfg = TrainConfig(shots_per_class=16, epochs=epochs, m_views=STANDARD_VIEWS, seed=seed)
    state, full = train(source, target, cfg, STANDARD_CLASSES)
    baseline_cfg = cfg.model_copy(update={"use_proto": False, "use_ot": False, "use_conf": False})
    _, baseline = train(source, target, baseline_cfg, STANDARD_CLASSES)
    return StandardRun(seed, source, target, state, full, baseline)
