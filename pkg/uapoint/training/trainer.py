"""Epoch loop: few-shot source, unlabeled target, prototypes refreshed with one epoch of lag."""

import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch

from ..alignment.prototypes import build_prototypes, reliability_weight
from ..common.config import EvalSettings, ModelSettings, ProjectionSettings, TrainConfig
from ..common.errors import EmptyInputError, NumericError, ParameterError
from ..common.logging import get_logger
from ..common.models import EpochRecord, EvalSnapshot, LossTerms, TrainReport
from ..common.seeding import Stream, make_rng
from ..eval.bound import gap_report
from ..eval.inference import encode_domain
from ..eval.metrics import top1_accuracy
from ..model.checkpoint import save_checkpoint
from ..model.knowledge import HashedKnowledgeSource
from ..model.state import ModelState
from ..pointcloud.base import PointSet, hidden_label_reads, training_section
from ..projection.camera import camera_rig
from ..projection.render import render_dataset
from .objective import batch_objective
from .optim import MomentumSGD, sgd_step
from .sampling import few_shot_indices

logger = get_logger(__name__)


def _batch(order: np.ndarray, step: int, size: int) -> List[int]:
    """Slice ``step`` of a shuffled order, wrapping around for the shorter domain."""
    n = len(order)
    return [int(order[(step * size + j) % n]) for j in range(min(size, n))]


def evaluate_state(
    state: ModelState,
    source: Sequence[PointSet],
    source_pixels: np.ndarray,
    source_labels: Sequence[int],
    target: Sequence[PointSet],
    target_pixels: np.ndarray,
    target_labels: Optional[Sequence[int]],
    rho: float,
    eval_cfg: EvalSettings,
) -> EvalSnapshot:
    """Accuracies on both domains and the domain-gap report."""
    encoded_source = encode_domain(state, source, source_pixels, rho)
    encoded_target = encode_domain(state, target, target_pixels, rho)
    gap = gap_report(encoded_source, source_labels, encoded_target, state.num_classes, eval_cfg)
    return EvalSnapshot(
        source_accuracy=top1_accuracy(encoded_source.labels, list(source_labels)),
        target_accuracy=None if target_labels is None else top1_accuracy(encoded_target.labels, list(target_labels)),
        gap=gap,
    )


def train(
    source: Sequence[PointSet],
    target: Sequence[PointSet],
    cfg: TrainConfig,
    class_names: Sequence[str],
    model_cfg: Optional[ModelSettings] = None,
    projection: Optional[ProjectionSettings] = None,
    eval_cfg: Optional[EvalSettings] = None,
    knowledge: Optional[np.ndarray] = None,
    checkpoint_path: Optional[str | Path] = None,
) -> Tuple[ModelState, TrainReport]:
    """
    Train the encoder stack.

    Epoch 1 runs without the prototype term. At the end of every epoch the source
    cloud embeddings collected during that epoch become reliability-weighted class
    prototypes, which the prototype term of the next epoch aligns targets to.
    Target labels are only read for evaluation, never inside the optimisation loop.

    Args:
        source: Labeled source samples (the few-shot subset is drawn from them)
        target: Target samples with hidden labels
        cfg: Training configuration
        class_names: Class names in label order
        model_cfg: Model settings
        projection: Camera settings
        eval_cfg: Settings of the per-epoch gap report
        knowledge: K x d_k knowledge embeddings; hashed fallback when None
        checkpoint_path: Where to write the final checkpoint

    Returns:
        (trained state, report)
    """
    model_cfg = model_cfg or ModelSettings()
    projection = projection or ProjectionSettings()
    eval_cfg = eval_cfg or EvalSettings()
    if projection.image_size != model_cfg.image_size:
        raise ParameterError(
            f"projection image_size {projection.image_size} differs from model image_size {model_cfg.image_size}"
        )
    if not target:
        raise EmptyInputError("training needs target samples")

    # fixed intra-op reduction order keeps runs bit-identical for any --threads
    torch.set_num_threads(1)

    k = len(class_names)
    labeled = few_shot_indices(source, cfg.shots_per_class, cfg.seed, k)
    source_labels = [int(ps.label) for ps in source]  # type: ignore[arg-type]
    target_labels: Optional[List[int]] = None
    if all(ps.has_hidden_label for ps in target):
        target_labels = [ps.reveal_label() for ps in target]

    cams = camera_rig(cfg.m_views, projection.distance, projection.fov_degrees, model_cfg.image_size)
    source_pixels = render_dataset(source, cams, cfg.threads)
    target_pixels = render_dataset(target, cams, cfg.threads)

    if knowledge is None:
        knowledge = HashedKnowledgeSource(model_cfg.embed_dim).load(class_names)
    state = ModelState(model_cfg, class_names, knowledge)
    optimizer = MomentumSGD.from_state(state, cfg)
    names = list(optimizer.params)
    params = list(optimizer.params.values())

    def snapshot() -> EvalSnapshot:
        return evaluate_state(
            state, source, source_pixels, source_labels, target, target_pixels, target_labels, cfg.rho, eval_cfg
        )

    initial = snapshot()
    logger.info(
        "Training started",
        labeled=len(labeled),
        target=len(target),
        variant=cfg.variant,
        epochs=cfg.epochs,
        target_acc=initial.target_accuracy,
    )

    batch = cfg.batch_size
    steps = max(math.ceil(len(labeled) / batch), math.ceil(len(target) / batch))
    reads_before = hidden_label_reads()
    records: List[EpochRecord] = []

    for epoch in range(1, cfg.epochs + 1):
        order_source = make_rng(cfg.seed, Stream.SHUFFLE, epoch, 0).permutation(len(labeled))
        order_target = make_rng(cfg.seed, Stream.SHUFFLE, epoch, 1).permutation(len(target))
        sums: Dict[str, float] = defaultdict(float)
        proto_steps = 0
        completed = 0
        skipped_before = optimizer.skipped
        embeddings: List[torch.Tensor] = []
        weights: List[torch.Tensor] = []
        proto_labels: List[int] = []

        with training_section():
            for step in range(steps):
                s_idx = [labeled[i] for i in _batch(order_source, step, batch)]
                t_idx = _batch(order_target, step, batch)
                try:
                    result = batch_objective(
                        state,
                        cfg,
                        torch.from_numpy(source_pixels[s_idx]),
                        [source[i] for i in s_idx],
                        [source_labels[i] for i in s_idx],
                        torch.from_numpy(target_pixels[t_idx]),
                        [target[i] for i in t_idx],
                        state.source_prototypes,
                    )
                    grads = torch.autograd.grad(result.total, params, allow_unused=True)
                except NumericError as e:
                    optimizer.skip("non-finite loss", epoch=epoch, step=step, error=str(e))
                    continue
                skipped = optimizer.skipped
                sgd_step(state, dict(zip(names, grads)), cfg, optimizer)
                if optimizer.skipped != skipped:
                    continue
                completed += 1

                with torch.no_grad():
                    probs = torch.stack([p.aggregated for p in result.source])
                    embeddings.append(torch.stack([p.cloud_embedding for p in result.source]))
                    weights.append(reliability_weight(probs))
                proto_labels.extend(source_labels[i] for i in s_idx)

                for name, value in result.term_values().items():
                    if value is not None:
                        sums[name] += value
                proto_steps += result.terms["proto"] is not None
                sums["total"] += float(result.total)

        if embeddings:
            state.source_prototypes = build_prototypes(torch.cat(embeddings), proto_labels, torch.cat(weights), k)
        else:
            logger.warning("No batch finished this epoch, prototypes kept", epoch=epoch)
        evaluation = snapshot()
        done = max(completed, 1)
        losses = LossTerms(
            ce=sums["ce"] / done,
            ortho=sums["ortho"] / done,
            proto=sums["proto"] / proto_steps if proto_steps else None,
            ot=sums["ot"] / done,
            conf=sums["conf"] / done,
            total=sums["total"] / done,
        )
        record = EpochRecord(
            epoch=epoch,
            losses=losses,
            source_accuracy=evaluation.source_accuracy,
            target_accuracy=evaluation.target_accuracy,
            mmd=evaluation.gap.mmd,
            frechet=evaluation.gap.frechet,
            bound=evaluation.gap,
            skipped_batches=optimizer.skipped - skipped_before,
        )
        records.append(record)
        logger.info(
            "Epoch finished",
            epoch=epoch,
            loss=round(losses.total, 6),
            source_acc=record.source_accuracy,
            target_acc=record.target_accuracy,
            mmd=round(record.mmd, 6),
            bound=round(record.bound.bound_total, 6),
        )

    if checkpoint_path is not None:
        save_checkpoint(state, checkpoint_path, cfg.variant)

    report = TrainReport(
        epochs=records,
        initial=initial,
        checkpoint_path=None if checkpoint_path is None else str(checkpoint_path),
        target_label_reads=hidden_label_reads() - reads_before,
    )
    return state, report
