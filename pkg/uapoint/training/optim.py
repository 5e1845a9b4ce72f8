"""Momentum SGD over a named parameter subset."""

from typing import Dict, Mapping, Optional

import torch
from torch import nn

from ..common.config import TrainConfig
from ..common.logging import get_logger
from ..model.state import ModelState

logger = get_logger(__name__)


class MomentumSGD:
    """Classical momentum SGD with L2 weight decay that skips non-finite gradients."""

    def __init__(self, params: Mapping[str, nn.Parameter], lr: float, momentum: float, weight_decay: float) -> None:
        """
        Initialize optimizer.

        Args:
            params: Named parameters to update; anything else stays frozen
            lr: Learning rate
            momentum: Momentum coefficient
            weight_decay: L2 coefficient added to the gradient
        """
        self.params: Dict[str, nn.Parameter] = dict(params)
        self.optimizer = torch.optim.SGD(
            list(self.params.values()),
            lr=lr,
            momentum=momentum,
            weight_decay=weight_decay,
            foreach=False,
        )
        self.skipped = 0

    @classmethod
    def from_state(cls, state: ModelState, cfg: TrainConfig) -> "MomentumSGD":
        """Optimizer over the parameters the configured variant trains."""
        return cls(state.trainable_parameters(cfg.variant), cfg.lr, cfg.momentum, cfg.weight_decay)

    def skip(self, reason: str, **context: object) -> None:
        """Count and log a batch that produced no update."""
        self.skipped += 1
        logger.warning("Skipping batch", reason=reason, skipped=self.skipped, **context)

    def step(self, grads: Mapping[str, Optional[torch.Tensor]]) -> bool:
        """
        Apply one update.

        Gradients for parameters outside the trained subset are ignored; missing
        gradients count as zero.

        Args:
            grads: Gradient per parameter name

        Returns:
            False when the step was skipped because a gradient was not finite
        """
        for name, grad in grads.items():
            if name in self.params and grad is not None and not bool(torch.isfinite(grad).all()):
                self.skip("non-finite gradient", parameter=name)
                return False

        for name, param in self.params.items():
            grad = grads.get(name)
            param.grad = torch.zeros_like(param) if grad is None else grad.detach().clone()
        self.optimizer.step()
        for param in self.params.values():
            param.grad = None
        return True


def sgd_step(
    state: ModelState,
    grads: Mapping[str, Optional[torch.Tensor]],
    cfg: TrainConfig,
    optimizer: Optional[MomentumSGD] = None,
) -> ModelState:
    """
    One optimizer step on a model state, then class embeddings back to unit norm.

    Args:
        state: Model state, updated in place
        grads: Gradient per parameter name
        cfg: Training configuration (lr, momentum, decay, variant)
        optimizer: Optimizer carrying the velocity; a fresh one starts from zero velocity

    Returns:
        The same state
    """
    optimizer = optimizer or MomentumSGD.from_state(state, cfg)
    if optimizer.step(grads):
        state.renormalize_class_embeddings()
    return state
