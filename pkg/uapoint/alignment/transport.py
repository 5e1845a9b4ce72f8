"""Entropy-regularised optimal transport in the log domain."""

from typing import List, Optional, Tuple, Union

import numpy as np
import torch

from ..common.errors import NonFiniteInputError, ParameterError, ShapeError
from ..common.logging import get_logger
from ..numerics.ops import DTYPE, as_tensor

logger = get_logger(__name__)

MIN_EPSILON = 1e-6
SCALING_FACTOR = 0.5
WARM_SWEEPS = 100

ArrayLike = Union[torch.Tensor, np.ndarray, List[float], List[List[float]]]


class TransportPlan:
    """Coupling returned by ``sinkhorn`` together with its objectives."""

    def __init__(
        self,
        plan: torch.Tensor,
        cost: float,
        entropy: float,
        epsilon: float,
        iterations: int,
        converged: bool,
        dual_trace: List[float],
        a: torch.Tensor,
        b: torch.Tensor,
    ) -> None:
        """
        Initialize transport plan.

        Args:
            plan: n x m coupling
            cost: Transport cost <C, plan>
            entropy: -sum plan log plan
            epsilon: Regularisation strength
            iterations: Sweeps performed at the requested regularisation
            converged: Whether the marginal tolerance was met
            dual_trace: Dual objective after every sweep at the requested regularisation
            a: Row marginal
            b: Column marginal
        """
        self.plan = plan
        self.cost = cost
        self.entropy = entropy
        self.epsilon = epsilon
        self.iterations = iterations
        self.converged = converged
        self.dual_trace = dual_trace
        self.a = a
        self.b = b

    @property
    def entropic_objective(self) -> float:
        return self.cost - self.epsilon * self.entropy

    def marginal_violation(self) -> float:
        """Largest absolute row or column marginal error."""
        rows = (self.plan.sum(dim=1) - self.a).abs().max()
        cols = (self.plan.sum(dim=0) - self.b).abs().max()
        return float(torch.maximum(rows, cols))


def cost_matrix(source: ArrayLike, target: ArrayLike) -> torch.Tensor:
    """Squared Euclidean distances ``C_ij = |s_i - t_j|^2``."""
    s = as_tensor(source)
    t = as_tensor(target)
    if s.dim() != 2 or t.dim() != 2 or s.shape[1] != t.shape[1]:
        raise ShapeError(f"cost_matrix needs n x d and m x d inputs, got {tuple(s.shape)} and {tuple(t.shape)}")
    return ((s.unsqueeze(1) - t.unsqueeze(0)) ** 2).sum(dim=-1)


def _marginal(values: Optional[ArrayLike], size: int, name: str) -> torch.Tensor:
    if values is None:
        return torch.full((size,), 1.0 / size, dtype=DTYPE)
    m = as_tensor(values).reshape(-1)
    if m.shape[0] != size:
        raise ShapeError(f"marginal {name} has {m.shape[0]} entries, cost matrix needs {size}")
    if not bool((m > 0).all()):
        raise ParameterError(f"marginal {name} must be strictly positive")
    if abs(float(m.sum()) - 1.0) > 1e-6:
        raise ParameterError(f"marginal {name} must sum to 1, got {float(m.sum())}")
    return m


def _sweep(
    f: torch.Tensor, g: torch.Tensor, c: torch.Tensor, epsilon: float, log_mu: torch.Tensor, log_nu: torch.Tensor
) -> Tuple[torch.Tensor, torch.Tensor]:
    """One row update then one column update of the dual potentials."""
    f = epsilon * log_mu - epsilon * torch.logsumexp((g.unsqueeze(0) - c) / epsilon, dim=1)
    g = epsilon * log_nu - epsilon * torch.logsumexp((f.unsqueeze(1) - c) / epsilon, dim=0)
    return f, g


def _log_plan(f: torch.Tensor, g: torch.Tensor, c: torch.Tensor, epsilon: float) -> torch.Tensor:
    return (f.unsqueeze(1) + g.unsqueeze(0) - c) / epsilon


def _row_error(log_plan: torch.Tensor, mu: torch.Tensor) -> float:
    return float((torch.exp(log_plan).sum(dim=1) - mu).abs().max())


def epsilon_schedule(cost: torch.Tensor, epsilon: float) -> List[float]:
    """
    Warm-up regularisation levels solved before ``epsilon``.

    Starts at the spread of the cost matrix and halves until the next level would
    reach ``epsilon``; empty when the spread is already at most ``epsilon``.
    """
    level = float(cost.max() - cost.min())
    levels: List[float] = []
    while level > epsilon:
        levels.append(level)
        level *= SCALING_FACTOR
    return levels


def sinkhorn(
    cost: ArrayLike,
    epsilon: float,
    a: Optional[ArrayLike] = None,
    b: Optional[ArrayLike] = None,
    tol: float = 1e-6,
    max_iter: int = 1000,
    epsilon_scaling: bool = True,
) -> TransportPlan:
    """
    Log-domain Sinkhorn iterations with epsilon scaling.

    The dual potentials are first solved at the coarser levels of
    ``epsilon_schedule`` (at most ``WARM_SWEEPS`` sweeps each) and carried over as
    the warm start of the requested ``epsilon``. At that level each sweep updates
    the row potential then the column potential, so columns match ``b`` after every
    sweep; iteration stops once the row violation drops below ``tol``. The plan is
    ``exp((f_i + g_j - C_ij) / epsilon)``.

    Args:
        cost: n x m finite cost matrix (gradients are not tracked)
        epsilon: Entropic regularisation, at least 1e-6
        a: Row marginal, uniform when omitted
        b: Column marginal, uniform when omitted
        tol: Marginal tolerance
        max_iter: Sweep cap at the requested ``epsilon``
        epsilon_scaling: Warm-start through coarser regularisation levels

    Returns:
        Transport plan with cost, entropy and the dual trace of the final level
    """
    c = as_tensor(cost).detach()
    if c.dim() != 2 or c.shape[0] == 0 or c.shape[1] == 0:
        raise ShapeError(f"cost matrix must be a non-empty 2-D matrix, got shape {tuple(c.shape)}")
    if not bool(torch.isfinite(c).all()):
        raise NonFiniteInputError("cost matrix contains non-finite entries")
    if epsilon < MIN_EPSILON:
        raise ParameterError(f"epsilon must be >= {MIN_EPSILON}, got {epsilon}")
    if max_iter < 1:
        raise ParameterError(f"max_iter must be >= 1, got {max_iter}")

    n, m = c.shape
    mu = _marginal(a, n, "a")
    nu = _marginal(b, m, "b")
    log_mu, log_nu = torch.log(mu), torch.log(nu)

    with torch.no_grad():
        f = torch.zeros(n, dtype=DTYPE)
        g = torch.zeros(m, dtype=DTYPE)
        warm_sweeps = 0
        for level in epsilon_schedule(c, epsilon) if epsilon_scaling else []:
            for _ in range(WARM_SWEEPS):
                f, g = _sweep(f, g, c, level, log_mu, log_nu)
                warm_sweeps += 1
                if _row_error(_log_plan(f, g, c, level), mu) < tol:
                    break

        dual_trace: List[float] = []
        converged = False
        iterations = 0
        for iterations in range(1, max_iter + 1):
            f, g = _sweep(f, g, c, epsilon, log_mu, log_nu)
            dual_trace.append(float(f @ mu + g @ nu))
            log_plan = _log_plan(f, g, c, epsilon)
            row_error = _row_error(log_plan, mu)
            if row_error < tol:
                converged = True
                break

        plan = torch.exp(log_plan)
        transport_cost = float((c * plan).sum())
        entropy = float(-(plan * log_plan).sum())

    if not converged:
        logger.warning(
            "Sinkhorn did not converge",
            iterations=iterations,
            warm_sweeps=warm_sweeps,
            row_error=row_error,
            epsilon=epsilon,
        )
    return TransportPlan(plan, transport_cost, entropy, epsilon, iterations, converged, dual_trace, mu, nu)


def sinkhorn_divergence(
    source: ArrayLike,
    target: ArrayLike,
    epsilon: float,
    tol: float = 1e-6,
    max_iter: int = 1000,
) -> float:
    """Debiased entropic OT ``W(S,T) - W(S,S)/2 - W(T,T)/2`` between two point clouds."""
    s, t = as_tensor(source).detach(), as_tensor(target).detach()
    st = sinkhorn(cost_matrix(s, t), epsilon, tol=tol, max_iter=max_iter).entropic_objective
    ss = sinkhorn(cost_matrix(s, s), epsilon, tol=tol, max_iter=max_iter).entropic_objective
    tt = sinkhorn(cost_matrix(t, t), epsilon, tol=tol, max_iter=max_iter).entropic_objective
    return max(0.0, st - 0.5 * ss - 0.5 * tt)
