"""View aggregation baselines compared against entropy-guided selection."""

import math
from typing import Dict, List, Sequence

import numpy as np
import torch

from ..common.seeding import Stream, make_rng
from ..numerics.ops import cosine_matrix
from .inference import EncodedDomain
from .metrics import top1_accuracy

STRATEGIES = ("avg", "weighted_avg", "random", "max_sim", "entropy_guided")


def _argmax(p: torch.Tensor) -> int:
    return int(np.argmax(p.detach().cpu().numpy()))


def strategy_predictions(encoded: EncodedDomain, seed: int = 0) -> Dict[str, List[int]]:
    """
    Per-strategy predictions for every cloud.

    ``avg`` averages all views, ``weighted_avg`` weights views by ``1 - H/log K``,
    ``random`` takes one seeded view, ``max_sim`` takes the view most similar to its
    own predicted class embedding and ``entropy_guided`` is the selection rule.

    Args:
        encoded: Encoded domain
        seed: Seed of the random-view strategy

    Returns:
        Strategy name to predicted classes
    """
    rng = make_rng(seed, Stream.EVAL, 0)
    out: Dict[str, List[int]] = {name: [] for name in STRATEGIES}
    for pred in encoded.predictions:
        probs = pred.per_view_probs
        m, k = probs.shape
        out["avg"].append(_argmax(probs.mean(dim=0)))

        weights = torch.clamp(1.0 - pred.per_view_entropy / math.log(k), min=0.0)
        if float(weights.sum()) > 0.0:
            out["weighted_avg"].append(_argmax((weights.unsqueeze(1) * probs).sum(dim=0) / weights.sum()))
        else:
            out["weighted_avg"].append(_argmax(probs.mean(dim=0)))

        out["random"].append(_argmax(probs[int(rng.integers(m))]))

        view_classes = [_argmax(p) for p in probs]
        sims = cosine_matrix(pred.embeddings, encoded.classes)
        own = torch.stack([sims[i, c] for i, c in enumerate(view_classes)])
        out["max_sim"].append(view_classes[_argmax(own)])

        out["entropy_guided"].append(pred.prediction)
    return out


def ablation_view_strategies(encoded: EncodedDomain, labels: Sequence[int], seed: int = 0) -> Dict[str, float]:
    """Target accuracy under every aggregation strategy."""
    return {name: top1_accuracy(preds, list(labels)) for name, preds in strategy_predictions(encoded, seed).items()}
