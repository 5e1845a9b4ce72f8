"""Entropy-guided view selection and confident aggregation."""

import math
from typing import List, Optional, Sequence, Union

import numpy as np
import torch
import torch.nn.functional as F

from ..common.errors import ParameterError, PreconditionError
from ..model.encoders import encode_views
from ..model.prompts import class_embedding_matrix, class_probs, gen_text_prompt
from ..model.state import ModelState
from ..numerics.ops import DTYPE, as_tensor
from ..projection.render import ViewSet


class ViewPrediction:
    """Per-view probabilities, entropies, the selected set and the aggregate of one cloud."""

    def __init__(
        self,
        per_view_probs: torch.Tensor,
        per_view_entropy: torch.Tensor,
        selected: List[int],
        aggregated: torch.Tensor,
        embeddings: torch.Tensor,
    ) -> None:
        """
        Initialize view prediction.

        Args:
            per_view_probs: M x K probabilities
            per_view_entropy: M entropies (no gradient)
            selected: Selected view indices M*
            aggregated: K probabilities averaged over M*
            embeddings: M x d view embeddings
        """
        self.per_view_probs = per_view_probs
        self.per_view_entropy = per_view_entropy
        self.selected = selected
        self.aggregated = aggregated
        self.embeddings = embeddings

    @property
    def cloud_embedding(self) -> torch.Tensor:
        """Unit-norm mean of the selected view embeddings."""
        return F.normalize(self.embeddings[self.selected].mean(dim=0), dim=-1, eps=1e-8)

    @property
    def prediction(self) -> int:
        return pseudo_argmax(self.aggregated)


def pseudo_argmax(p: torch.Tensor) -> int:
    """Argmax with ties broken towards the lowest index."""
    return int(np.argmax(p.detach().cpu().numpy()))


def predictive_entropy(p: Union[torch.Tensor, Sequence[float]]) -> torch.Tensor:
    """Shannon entropy (nats) over the last axis with 0 log 0 = 0."""
    return torch.special.entr(as_tensor(p)).sum(dim=-1)


def select_views(entropies: Union[torch.Tensor, Sequence[float]], rho: float) -> List[int]:
    """
    Views whose entropy is at most the nearest-rank ``rho`` percentile.

    Args:
        entropies: M per-view entropies
        rho: Percentile in (0, 1]

    Returns:
        Ascending view indices; ties at the threshold are included
    """
    values = as_tensor(entropies).detach().reshape(-1).cpu().numpy()
    if values.size == 0:
        raise PreconditionError("select_views needs at least one view")
    if not 0.0 < rho <= 1.0:
        raise ParameterError(f"rho must be in (0, 1], got {rho}")
    rank = min(max(math.ceil(round(rho * values.size, 9)), 1), values.size)
    threshold = np.sort(values)[rank - 1]
    return [int(m) for m in np.flatnonzero(values <= threshold)]


def aggregate(probs: Union[torch.Tensor, Sequence[Sequence[float]]], selected: Sequence[int]) -> torch.Tensor:
    """Uniform mean of the selected probability vectors."""
    probs = as_tensor(probs)
    if not selected:
        raise PreconditionError("aggregate needs a non-empty selection")
    if min(selected) < 0 or max(selected) >= probs.shape[0]:
        raise PreconditionError(f"selection {list(selected)} out of range for {probs.shape[0]} views")
    return probs[list(selected)].mean(dim=0)


def predict_batch(
    pixels: torch.Tensor,
    prompts: Optional[torch.Tensor],
    state: ModelState,
    rho: float,
    classes: Optional[torch.Tensor] = None,
    selections: Optional[Sequence[Sequence[int]]] = None,
) -> List[ViewPrediction]:
    """
    Predict a batch of clouds from their depth maps.

    Args:
        pixels: B x M x H x W depth maps
        prompts: B x L x d_tok visual prompts, or None
        state: Model state
        rho: Selection percentile
        classes: Effective class embeddings; computed from the state when omitted
        selections: Fixed per-cloud view selections that bypass the entropy rule

    Returns:
        One prediction per cloud
    """
    if classes is None:
        text_prompt = gen_text_prompt(state) if state.use_text_prompt else None
        classes = class_embedding_matrix(state, text_prompt)

    embeddings = encode_views(pixels, prompts, state)
    probs = class_probs(embeddings, state, classes)
    entropy = predictive_entropy(probs).detach()

    predictions = []
    for i in range(pixels.shape[0]):
        selected = list(selections[i]) if selections is not None else select_views(entropy[i], rho)
        predictions.append(ViewPrediction(probs[i], entropy[i], selected, aggregate(probs[i], selected), embeddings[i]))
    return predictions


def predict_cloud(
    vs: ViewSet,
    state: ModelState,
    prompt: Optional[torch.Tensor],
    rho: float,
    classes: Optional[torch.Tensor] = None,
) -> ViewPrediction:
    """Encode, classify, select and aggregate the views of one cloud."""
    pixels = torch.from_numpy(vs.as_array()).to(DTYPE).unsqueeze(0)
    batch_prompt = prompt.unsqueeze(0) if prompt is not None else None
    return predict_batch(pixels, batch_prompt, state, rho, classes)[0]
