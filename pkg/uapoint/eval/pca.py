"""Two-component PCA export of cloud embeddings."""

import csv
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import torch

from ..common.errors import PreconditionError


def pca_2d(embeddings: np.ndarray) -> np.ndarray:
    """Project rows on the two leading principal components (sign fixed by the largest loading)."""
    x = np.asarray(embeddings, dtype=np.float64)
    if x.shape[0] < 2:
        raise PreconditionError("PCA needs at least two embeddings")
    centred = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(centred, full_matrices=False)
    components = vt[:2]
    signs = np.sign(components[np.arange(len(components)), np.abs(components).argmax(axis=1)])
    components = components * np.where(signs == 0, 1.0, signs)[:, None]
    coords = centred @ components.T
    if coords.shape[1] < 2:
        coords = np.hstack([coords, np.zeros((len(coords), 2 - coords.shape[1]))])
    return coords


def export_pca(
    path: str | Path,
    source_embeddings: torch.Tensor,
    source_labels: Sequence[int],
    target_embeddings: torch.Tensor,
    target_labels: Sequence[Optional[int]],
) -> None:
    """Write ``domain,label,pc1,pc2`` rows for both domains."""
    s = source_embeddings.detach().cpu().numpy()
    t = target_embeddings.detach().cpu().numpy()
    coords = pca_2d(np.vstack([s, t]))
    domains = ["source"] * len(s) + ["target"] * len(t)
    labels = list(source_labels) + list(target_labels)

    with Path(path).open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["domain", "label", "pc1", "pc2"])
        for domain, label, (pc1, pc2) in zip(domains, labels, coords):
            writer.writerow([domain, "" if label is None else int(label), repr(float(pc1)), repr(float(pc2))])
