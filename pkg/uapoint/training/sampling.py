"""Few-shot sampling of the labeled source set."""

from typing import Dict, List, Optional, Sequence

from ..common.errors import DatasetError
from ..common.seeding import Stream, make_rng
from ..pointcloud.base import PointSet


def few_shot_indices(
    dataset: Sequence[PointSet],
    shots: int,
    seed: int,
    num_classes: Optional[int] = None,
) -> List[int]:
    """
    Indices of ``min(shots, available)`` samples per class.

    Each class is shuffled with its own seeded stream.

    Args:
        dataset: Labeled samples
        shots: Samples per class
        seed: User seed
        num_classes: K; every class in [0, K) must be present

    Returns:
        Indices ordered by class, then by shuffled position
    """
    by_class: Dict[int, List[int]] = {}
    for i, ps in enumerate(dataset):
        if ps.label is None:
            raise DatasetError(f"sample {i} has no label")
        by_class.setdefault(int(ps.label), []).append(i)
    if not by_class:
        raise DatasetError("few-shot sampling of an empty dataset")

    k = num_classes if num_classes is not None else max(by_class) + 1
    missing = [c for c in range(k) if c not in by_class]
    if missing:
        raise DatasetError(f"classes absent from the labeled set: {missing}")

    chosen: List[int] = []
    for c in range(k):
        members = by_class[c]
        order = make_rng(seed, Stream.FEW_SHOT, c).permutation(len(members))
        chosen.extend(members[int(j)] for j in order[: min(shots, len(members))])
    return chosen


def few_shot_sample(
    dataset: Sequence[PointSet],
    shots: int,
    seed: int,
    num_classes: Optional[int] = None,
) -> List[PointSet]:
    """Samples selected by ``few_shot_indices``."""
    return [dataset[i] for i in few_shot_indices(dataset, shots, seed, num_classes)]
