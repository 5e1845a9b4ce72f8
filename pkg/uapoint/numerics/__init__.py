"""Dense numeric primitives, the cross-attention block and gradient checking."""

from .attention import feed_forward, mhca
from .gradcheck import finite_diff_check, finite_diff_errors
from .ops import DTYPE, as_tensor, cosine_matrix, cosine_sim, softmax

__all__ = [
    "DTYPE",
    "as_tensor",
    "cosine_matrix",
    "cosine_sim",
    "feed_forward",
    "finite_diff_check",
    "finite_diff_errors",
    "mhca",
    "softmax",
]
