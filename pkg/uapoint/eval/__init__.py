"""Accuracy, domain-gap metrics, the surrogate bound and view-strategy ablations."""

from .ablation import STRATEGIES, ablation_view_strategies, strategy_predictions
from .bound import bound_terms, gap_report, prototype_discrepancy
from .inference import EncodedDomain, encode_domain
from .metrics import frechet_distance, median_bandwidth, mmd_rbf, top1_accuracy
from .pca import export_pca, pca_2d

__all__ = [
    "STRATEGIES",
    "EncodedDomain",
    "ablation_view_strategies",
    "bound_terms",
    "encode_domain",
    "export_pca",
    "frechet_distance",
    "gap_report",
    "median_bandwidth",
    "mmd_rbf",
    "pca_2d",
    "prototype_discrepancy",
    "strategy_predictions",
    "top1_accuracy",
]
