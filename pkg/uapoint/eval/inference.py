"""Gradient-free encoding of whole datasets."""

from typing import List, Sequence

import numpy as np
import torch

from ..model.prompts import class_embedding_matrix, cloud_prompts, gen_text_prompt
from ..model.state import ModelState
from ..numerics.ops import DTYPE
from ..pointcloud.base import PointSet
from ..selection.views import ViewPrediction, predict_batch


class EncodedDomain:
    """Predictions of every cloud of one domain plus the class matrix used."""

    def __init__(self, predictions: List[ViewPrediction], classes: torch.Tensor) -> None:
        """
        Initialize encoded domain.

        Args:
            predictions: One view prediction per cloud
            classes: Effective K x d class embeddings
        """
        self.predictions = predictions
        self.classes = classes

    def __len__(self) -> int:
        return len(self.predictions)

    @property
    def embeddings(self) -> torch.Tensor:
        """n x d cloud embeddings."""
        return torch.stack([p.cloud_embedding for p in self.predictions])

    @property
    def probs(self) -> torch.Tensor:
        """n x K aggregated probabilities."""
        return torch.stack([p.aggregated for p in self.predictions])

    @property
    def labels(self) -> List[int]:
        """Predicted classes."""
        return [p.prediction for p in self.predictions]


def encode_domain(
    state: ModelState,
    clouds: Sequence[PointSet],
    pixels: np.ndarray,
    rho: float,
    batch_size: int = 64,
) -> EncodedDomain:
    """
    Predict every cloud of a dataset without tracking gradients.

    Args:
        state: Model state
        clouds: Samples (for the point encoder)
        pixels: N x M x H x W cached depth maps
        rho: Selection percentile
        batch_size: Clouds per forward pass

    Returns:
        Encoded domain
    """
    with torch.no_grad():
        text_prompt = gen_text_prompt(state) if state.use_text_prompt else None
        classes = class_embedding_matrix(state, text_prompt)
        predictions: List[ViewPrediction] = []
        for start in range(0, len(clouds), batch_size):
            chunk = clouds[start : start + batch_size]
            _, prompts = cloud_prompts(state, chunk)
            views = torch.from_numpy(np.ascontiguousarray(pixels[start : start + batch_size])).to(DTYPE)
            predictions.extend(predict_batch(views, prompts, state, rho, classes))
    return EncodedDomain(predictions, classes)
