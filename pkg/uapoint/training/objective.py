"""Composite loss of one source/target minibatch."""

from typing import Dict, List, Optional, Sequence

import torch

from ..alignment.prototypes import Prototypes, proto_loss, pseudo_labels, reliability_weight
from ..alignment.regularizers import conf_loss, token_ortho_loss, total_loss
from ..alignment.transport import cost_matrix, sinkhorn
from ..common.config import TrainConfig
from ..model.prompts import class_embedding_matrix, cloud_prompts, gen_text_prompt
from ..model.state import ModelState
from ..pointcloud.base import PointSet
from ..selection.views import ViewPrediction, predict_batch


class PinnedChoices:
    """
    Stop-gradient decisions of one batch.

    Passing them back into ``batch_objective`` re-evaluates the loss with the same
    view selections, transport plan, pseudo-labels and reliability weights, which
    makes the loss a smooth function of the parameters.
    """

    def __init__(
        self,
        source_selections: List[List[int]],
        target_selections: List[List[int]],
        plan: Optional[torch.Tensor],
        target_labels: Optional[List[int]],
        target_weights: Optional[torch.Tensor],
    ) -> None:
        self.source_selections = source_selections
        self.target_selections = target_selections
        self.plan = plan
        self.target_labels = target_labels
        self.target_weights = target_weights


class BatchLoss:
    """Loss terms, total and intermediate predictions of one batch."""

    def __init__(
        self,
        terms: Dict[str, Optional[torch.Tensor]],
        total: torch.Tensor,
        source: List[ViewPrediction],
        target: List[ViewPrediction],
        pinned: PinnedChoices,
    ) -> None:
        self.terms = terms
        self.total = total
        self.source = source
        self.target = target
        self.pinned = pinned

    def term_values(self) -> Dict[str, Optional[float]]:
        return {name: None if value is None else float(value) for name, value in self.terms.items()}


def batch_objective(
    state: ModelState,
    cfg: TrainConfig,
    source_pixels: torch.Tensor,
    source_clouds: Sequence[PointSet],
    source_labels: Sequence[int],
    target_pixels: torch.Tensor,
    target_clouds: Sequence[PointSet],
    prototypes: Optional[Prototypes] = None,
    pinned: Optional[PinnedChoices] = None,
) -> BatchLoss:
    """
    Evaluate ``ce + alpha * (ortho + proto + ot + conf)`` on one batch.

    Disabled terms (``use_*`` switches) are reported as 0; the prototype term is
    None when no prototypes are given.

    Args:
        state: Model state
        cfg: Training configuration
        source_pixels: B_s x M x H x W source depth maps
        source_clouds: Source samples
        source_labels: Source labels
        target_pixels: B_t x M x H x W target depth maps
        target_clouds: Target samples (their labels are never read)
        prototypes: Previous-epoch source prototypes
        pinned: Stop-gradient decisions to reuse instead of recomputing

    Returns:
        Batch loss
    """
    text_prompt = gen_text_prompt(state) if state.use_text_prompt else None
    classes = class_embedding_matrix(state, text_prompt)

    source_tokens, source_prompts = cloud_prompts(state, source_clouds)
    target_tokens, target_prompts = cloud_prompts(state, target_clouds)
    source = predict_batch(
        source_pixels, source_prompts, state, cfg.rho, classes, pinned.source_selections if pinned else None
    )
    target = predict_batch(
        target_pixels, target_prompts, state, cfg.rho, classes, pinned.target_selections if pinned else None
    )

    source_probs = torch.stack([p.aggregated for p in source])
    target_probs = torch.stack([p.aggregated for p in target])
    labels = torch.as_tensor(list(source_labels))
    ce = -torch.log(source_probs[torch.arange(len(source)), labels]).mean()
    zero = ce * 0.0

    ortho = zero
    if cfg.use_ortho:
        ortho = torch.stack([token_ortho_loss(t) for t in source_tokens]).mean() + torch.stack(
            [token_ortho_loss(t) for t in target_tokens]
        ).mean()

    source_emb = torch.stack([p.cloud_embedding for p in source])
    target_emb = torch.stack([p.cloud_embedding for p in target])

    plan = pinned.plan if pinned else None
    ot = zero
    if cfg.use_ot:
        cost = cost_matrix(source_emb, target_emb)
        if plan is None:
            plan = sinkhorn(cost, cfg.epsilon_ot, tol=cfg.sinkhorn_tol, max_iter=cfg.sinkhorn_max_iter).plan
        ot = (cost * plan).sum()

    conf = conf_loss(source_probs, target_probs) if cfg.use_conf else zero

    proto: Optional[torch.Tensor] = None
    target_labels = pinned.target_labels if pinned else None
    target_weights = pinned.target_weights if pinned else None
    if prototypes is not None and cfg.use_proto:
        if target_labels is None:
            target_labels = pseudo_labels(target_probs)
        if target_weights is None:
            target_weights = reliability_weight(target_probs).detach()
        proto = proto_loss(target_emb, target_weights, target_labels, prototypes.detach(), state.temperature)

    total = total_loss(ce, ortho, proto, ot, conf, cfg.alpha)
    choices = PinnedChoices(
        [p.selected for p in source],
        [p.selected for p in target],
        plan,
        target_labels,
        target_weights,
    )
    terms = {"ce": ce, "ortho": ortho, "proto": proto, "ot": ot, "conf": conf}
    return BatchLoss(terms, total, source, target, choices)  # type: ignore[arg-type]
