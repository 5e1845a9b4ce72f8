"""Domain-gap report: MMD, Fréchet distance and the surrogate target-risk bound."""

from typing import Optional, Sequence, Tuple

import numpy as np
import torch

from ..alignment.prototypes import build_prototypes, pseudo_labels, reliability_weight
from ..alignment.transport import sinkhorn_divergence
from ..common.config import EvalSettings
from ..common.errors import DatasetError
from ..common.logging import get_logger
from ..common.models import GapReport
from ..common.seeding import Stream, make_rng
from ..model.state import ModelState
from ..pointcloud.base import PointSet
from .inference import EncodedDomain, encode_domain
from .metrics import frechet_distance, mmd_rbf, top1_accuracy

logger = get_logger(__name__)


def _subsample(n: int, limit: int, seed: int) -> np.ndarray:
    """Sorted subset of at most ``limit`` indices; equal n gives equal subsets."""
    if n <= limit:
        return np.arange(n)
    return np.sort(make_rng(seed, Stream.EVAL, n).choice(n, size=limit, replace=False))


def prototype_discrepancy(
    source: EncodedDomain,
    source_labels: Sequence[int],
    target: EncodedDomain,
    num_classes: int,
) -> Tuple[float, bool]:
    """
    Sum of squared distances between source and target prototypes.

    Source prototypes use true labels, target prototypes use pseudo-labels; both are
    weighted by reliability. Only classes valid in both domains count.

    Returns:
        (discrepancy, whether any class was shared)
    """
    s_probs, t_probs = source.probs, target.probs
    s_protos = build_prototypes(source.embeddings, list(source_labels), reliability_weight(s_probs), num_classes)
    t_protos = build_prototypes(target.embeddings, pseudo_labels(t_probs), reliability_weight(t_probs), num_classes)
    shared = s_protos.valid & t_protos.valid
    if not bool(shared.any()):
        logger.warning("No class has a valid prototype in both domains; prototype term set to 0")
        return 0.0, False
    diff = s_protos.vectors[shared] - t_protos.vectors[shared]
    return float((diff**2).sum()), True


def gap_report(
    source: EncodedDomain,
    source_labels: Sequence[int],
    target: EncodedDomain,
    num_classes: int,
    cfg: Optional[EvalSettings] = None,
) -> GapReport:
    """
    Assemble MMD, Fréchet distance and the three bound terms.

    Args:
        source: Encoded source domain
        source_labels: True source labels
        target: Encoded target domain
        num_classes: K
        cfg: Evaluation settings (beta, epsilon, bandwidth, sample cap, seed)

    Returns:
        Gap report with ``bound_total = risk + ot / 2 + beta * proto``
    """
    cfg = cfg or EvalSettings()
    z_s, z_t = source.embeddings, target.embeddings

    risk = 1.0 - top1_accuracy(source.labels, list(source_labels))
    s_idx = _subsample(len(source), cfg.max_bound_samples, cfg.seed)
    t_idx = _subsample(len(target), cfg.max_bound_samples, cfg.seed)
    ot_term = sinkhorn_divergence(z_s[torch.as_tensor(s_idx)], z_t[torch.as_tensor(t_idx)], cfg.epsilon)
    proto_term, proto_valid = prototype_discrepancy(source, source_labels, target, num_classes)

    report = GapReport(
        mmd=mmd_rbf(z_s, z_t, cfg.bandwidth),
        frechet=frechet_distance(z_s, z_t),
        bound_source_risk=risk,
        bound_ot_term=ot_term,
        bound_proto_term=proto_term,
        bound_total=risk + 0.5 * ot_term + cfg.beta * proto_term,
        beta=cfg.beta,
        proto_term_valid=proto_valid,
    )
    logger.debug("Gap report", **report.model_dump())
    return report


def bound_terms(
    state: ModelState,
    source: Sequence[PointSet],
    source_pixels: np.ndarray,
    target: Sequence[PointSet],
    target_pixels: np.ndarray,
    beta: float,
    epsilon: float,
    rho: float = 0.5,
    cfg: Optional[EvalSettings] = None,
) -> GapReport:
    """
    Surrogate bound of a model on a labeled source and an unlabeled target dataset.

    Args:
        state: Model state
        source: Labeled source samples
        source_pixels: Their cached depth maps
        target: Target samples (labels are not used)
        target_pixels: Their cached depth maps
        beta: Weight of the prototype term
        epsilon: Entropic regularisation of the OT term
        rho: Selection percentile
        cfg: Remaining evaluation settings

    Returns:
        Gap report
    """
    base = cfg or EvalSettings()
    settings = base.model_copy(update={"beta": beta, "epsilon": epsilon})
    encoded_source = encode_domain(state, source, source_pixels, rho)
    encoded_target = encode_domain(state, target, target_pixels, rho)
    if any(ps.label is None for ps in source):
        raise DatasetError("bound_terms needs labeled source samples")
    labels = [int(ps.label) for ps in source]  # type: ignore[arg-type]
    return gap_report(encoded_source, labels, encoded_target, state.num_classes, settings)
