"""Seeded random streams.

Every random draw in the package comes from a PCG64 generator keyed by
``(seed, stream, *index)`` so results do not depend on call order or thread count.
"""

from enum import IntEnum

import numpy as np

from .errors import ParameterError


class Stream(IntEnum):
    """Independent random streams derived from one user seed."""

    SAMPLE = 0
    SHIFT = 1
    INIT = 2
    FEW_SHOT = 3
    SHUFFLE = 4
    EVAL = 5
    CORRUPT = 6
    KNOWLEDGE = 7


def make_rng(seed: int, stream: Stream, *index: int) -> np.random.Generator:
    """
    Build the generator for one (seed, stream, index) key.

    Args:
        seed: Non-negative user seed
        stream: Stream tag
        index: Optional sub-keys such as sample index or epoch

    Returns:
        Fresh PCG64-backed generator
    """
    if seed < 0 or any(i < 0 for i in index):
        raise ParameterError(f"seeds and stream indices must be non-negative, got {seed} {index}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream), *map(int, index)])))
