"""Exact k-nearest-neighbor search over embedded training points."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddedDataset


class NeighborError(ValueError):
    pass


@dataclass(frozen=True)
class NeighborSet:
    indices: np.ndarray      # positions into data.points / data.anchors
    anchors: np.ndarray      # time indices of the selected neighbors
    distances: np.ndarray    # nondecreasing
    j: int


def knn(data: EmbeddedDataset, query: np.ndarray, j: int,
        query_anchor: int | None = None, exclusion: int = 0,
        valid: np.ndarray | None = None) -> NeighborSet:
    """The j points nearest the query in Euclidean distance.

    Ties break toward the lower anchor index, so results are reproducible.
    ``query_anchor``/``exclusion`` skip neighbors within ``exclusion`` seasons
    of the query's own time (leakage guard for same-series queries); ``valid``
    is an optional boolean mask over data points.
    """
    query = np.asarray(query, dtype=float)
    n, m = data.points.shape
    if query.shape != (m,):
        raise NeighborError(f"query dimension {query.shape} != embedded dimension ({m},)")
    if j < 1 or j > n:
        raise NeighborError(f"j={j} out of range for {n} points")
    mask = np.ones(n, dtype=bool)
    if valid is not None:
        mask &= np.asarray(valid, dtype=bool)
    if query_anchor is not None and exclusion > 0:
        mask &= np.abs(data.anchors - query_anchor) >= exclusion
    if mask.sum() < j:
        raise NeighborError(
            f"only {int(mask.sum())} usable neighbors after exclusion, need {j}")
    idx = np.flatnonzero(mask)
    d = np.sqrt(((data.points[idx] - query) ** 2).sum(axis=1))
    # sort by (distance, anchor index)
    order = np.lexsort((data.anchors[idx], d))[:j]
    sel = idx[order]
    return NeighborSet(indices=sel, anchors=data.anchors[sel], distances=d[order], j=j)
