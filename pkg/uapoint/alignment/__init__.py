"""Prototype alignment, entropic optimal transport and the auxiliary regularisers."""

from .prototypes import Prototypes, build_prototypes, proto_loss, pseudo_label, pseudo_labels, reliability_weight
from .regularizers import conf_loss, ortho_loss, token_ortho_loss, total_loss
from .transport import TransportPlan, cost_matrix, epsilon_schedule, sinkhorn, sinkhorn_divergence

__all__ = [
    "Prototypes",
    "TransportPlan",
    "build_prototypes",
    "conf_loss",
    "cost_matrix",
    "epsilon_schedule",
    "ortho_loss",
    "proto_loss",
    "pseudo_label",
    "pseudo_labels",
    "reliability_weight",
    "sinkhorn",
    "sinkhorn_divergence",
    "token_ortho_loss",
    "total_loss",
]
