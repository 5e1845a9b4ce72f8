"""Few-shot sampling, the optimizer and the training loop."""

from .objective import BatchLoss, PinnedChoices, batch_objective
from .optim import MomentumSGD, sgd_step
from .sampling import few_shot_indices, few_shot_sample
from .trainer import evaluate_state, train

__all__ = [
    "BatchLoss",
    "MomentumSGD",
    "PinnedChoices",
    "batch_objective",
    "evaluate_state",
    "few_shot_indices",
    "few_shot_sample",
    "sgd_step",
    "train",
]
