"""Entropy-guided view selection (used identically for training and inference)."""

from .views import (
    ViewPrediction,
    aggregate,
    predict_batch,
    predict_cloud,
    predictive_entropy,
    pseudo_argmax,
    select_views,
)

__all__ = [
    "ViewPrediction",
    "aggregate",
    "predict_batch",
    "predict_cloud",
    "predictive_entropy",
    "pseudo_argmax",
    "select_views",
]
