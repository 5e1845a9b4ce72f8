"""Central finite-difference check of autograd gradients."""

import math
from typing import Callable, Dict, Mapping, Optional

import torch

from ..common.errors import NumericError, ParameterError
from ..common.logging import get_logger

logger = get_logger(__name__)

LossFn = Callable[[], torch.Tensor]


def _scalar(value: torch.Tensor) -> float:
    result = float(value)
    if not math.isfinite(result):
        raise NumericError("loss evaluated to a non-finite value during gradient check")
    return result


def finite_diff_errors(
    loss_fn: LossFn,
    params: Mapping[str, torch.Tensor],
    step: float = 1e-5,
    max_entries: Optional[int] = None,
) -> Dict[str, float]:
    """
    Per-parameter maximum relative error between autograd and central differences.

    ``loss_fn`` is re-evaluated after each in-place perturbation, so it must read the
    tensors in ``params`` directly. Relative error is
    ``|a - c| / max(|a|, |c|, 1e-8)``.

    Args:
        loss_fn: Zero-argument closure returning a scalar loss
        params: Named leaf tensors with ``requires_grad``
        step: Central-difference step in [1e-6, 1e-3]
        max_entries: Check at most this many entries per tensor (evenly spaced)

    Returns:
        Mapping of parameter name to its maximum relative error
    """
    if not 1e-6 <= step <= 1e-3:
        raise ParameterError(f"finite-difference step must be in [1e-6, 1e-3], got {step}")

    names = list(params)
    tensors = [params[name] for name in names]

    with torch.enable_grad():
        loss = loss_fn()
        _scalar(loss)
        grads = torch.autograd.grad(loss, tensors, allow_unused=True)

    errors: Dict[str, float] = {}
    with torch.no_grad():
        for name, tensor, grad in zip(names, tensors, grads):
            analytic = torch.zeros_like(tensor) if grad is None else grad
            flat = tensor.view(-1)
            flat_grad = analytic.reshape(-1)
            count = flat.numel()
            if max_entries is not None and count > max_entries:
                indices = torch.linspace(0, count - 1, max_entries).round().long().tolist()
            else:
                indices = list(range(count))

            worst = 0.0
            for i in indices:
                original = float(flat[i])
                flat[i] = original + step
                plus = _scalar(loss_fn())
                flat[i] = original - step
                minus = _scalar(loss_fn())
                flat[i] = original

                central = (plus - minus) / (2.0 * step)
                a = float(flat_grad[i])
                rel = abs(a - central) / max(abs(a), abs(central), 1e-8)
                worst = max(worst, rel)
            errors[name] = worst

    logger.debug("Gradient check finished", worst=max(errors.values(), default=0.0))
    return errors


def finite_diff_check(
    loss_fn: LossFn,
    params: Mapping[str, torch.Tensor],
    step: float = 1e-5,
    max_entries: Optional[int] = None,
) -> float:
    """Maximum relative error over every checked parameter entry."""
    return max(finite_diff_errors(loss_fn, params, step, max_entries).values(), default=0.0)
