"""Intrinsic dimension estimation, delay-map sizing, and multiview enumeration."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .dataio import ColumnCoding, DataError, SeasonalSeries


@dataclass(frozen=True)
class IntrinsicDimEstimate:
    d_hat: float
    k_range: tuple[int, int]
    per_point: np.ndarray               # (n_k, n_points) per-point estimates

    def __post_init__(self):
        if not (math.isfinite(self.d_hat) and self.d_hat > 0):
            raise ValueError(f"d_hat must be finite and positive, got {self.d_hat}")


@dataclass(frozen=True)
class View:
    """One delay-map coordinate set: (variable, lag) pairs, variables 1-based."""
    id: int
    coords: tuple[tuple[int, int], ...]

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def max_lag(self) -> int:
        return max(lag for _, lag in self.coords)

    def to_json(self) -> dict:
        return {"id": self.id, "coords": [list(c) for c in self.coords]}

    @classmethod
    def from_json(cls, d: dict) -> "View":
        return cls(id=int(d["id"]), coords=tuple((int(v), int(l)) for v, l in d["coords"]))


@dataclass(frozen=True)
class EmbeddedDataset:
    points: np.ndarray                  # (n, m)
    anchors: np.ndarray                 # (n,) time index of the lag-0 coordinate
    view: View


def levina_bickel_dim(points: np.ndarray, k1: int = 5, k2: int = 10) -> IntrinsicDimEstimate:
    """Maximum-likelihood intrinsic dimension from nearest-neighbor distance ratios.

    For each point and neighbor count k, the estimate inverts the average of
    log(T_k/T_j) over j < k, where T_j is the distance to the j-th nearest
    neighbor, with the bias-corrected divisor (k-2); estimates are averaged
    over points, then over k in [k1, k2]. Points with zero neighbor
    distances (duplicates) are dropped with a warning, as are the rare
    points whose k nearest neighbors are all equidistant.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if k1 < 2:
        raise ValueError("k1 must be >= 2")
    if k2 < k1:
        raise ValueError("k2 must be >= k1")
    if n <= k2 + 1:
        raise ValueError(f"need more than k2+1={k2 + 1} points, have {n}")
    tree = cKDTree(points)
    dist, _ = tree.query(points, k=k2 + 1)
    dist = dist[:, 1:]                   # drop self-distance
    keep = np.all(dist > 0, axis=1)
    if not np.all(keep):
        warnings.warn(f"dropping {int((~keep).sum())} point(s) with duplicate neighbors")
        dist = dist[keep]
        if len(dist) == 0:
            raise ValueError("all points degenerate (duplicates)")
    logd = np.log(dist)
    per_k = []
    per_point = []
    for k in range(k1, k2 + 1):
        sum_log_ratio = (logd[:, k - 1][:, None] - logd[:, : k - 1]).sum(axis=1)
        with np.errstate(divide="ignore"):
            m_hat = max(k - 2, 1) / sum_log_ratio
        finite = np.isfinite(m_hat)
        if not np.all(finite):
            warnings.warn(f"dropping {int((~finite).sum())} point(s) with "
                          f"equidistant neighbors at k={k}")
        per_point.append(m_hat)
        per_k.append(m_hat[finite].mean())
    d_hat = float(np.mean(per_k))
    return IntrinsicDimEstimate(d_hat=d_hat, k_range=(k1, k2), per_point=np.asarray(per_point))


def embedding_dim(est: IntrinsicDimEstimate | float, multiplier: float = 2.5) -> int:
    """Delay-map size: ceil(multiplier * d_hat), floored at 2."""
    d_hat = est.d_hat if isinstance(est, IntrinsicDimEstimate) else float(est)
    if d_hat <= 0:
        raise ValueError("d_hat must be positive")
    return max(2, math.ceil(multiplier * d_hat))


def delay_matrix(flat: np.ndarray, view: View, t_start: int = 0, t_end: int | None = None):
    """Delay vectors over a flat (time x variable) array for anchors in range.

    Returns (points, anchors); anchors needing lags before t_start are omitted.
    """
    if view.dim == 0:
        raise DataError("view has no coordinates")
    T = len(flat) if t_end is None else t_end
    first = t_start + view.max_lag
    anchors = np.arange(first, T)
    if len(anchors) == 0:
        warnings.warn("view lag exceeds series length; no embeddable anchors")
        return np.empty((0, view.dim)), anchors
    cols = [flat[anchors - lag, var - 1] for var, lag in view.coords]
    return np.column_stack(cols), anchors


def build_delay_map(s: SeasonalSeries, view: View, train_only: bool = True) -> EmbeddedDataset:
    """Embed a seasonal series under one view. ``train_only`` restricts anchors
    (and their lags) to the training portion."""
    flat = s.flat()
    t_end = s.n_train_times() if train_only and s.train_through is not None else len(flat)
    points, anchors = delay_matrix(flat, view, t_start=0, t_end=t_end)
    return EmbeddedDataset(points=points, anchors=anchors, view=view)


def embed_query(s: SeasonalSeries, view: View, t: int) -> np.ndarray:
    """Delay vector for a single anchor time t from the full series."""
    flat = s.flat()
    if t - view.max_lag < 0 or t >= len(flat):
        raise DataError(f"anchor t={t} lacks history for max lag {view.max_lag}")
    return np.array([flat[t - lag, var - 1] for var, lag in view.coords])


def enumerate_views(coding: ColumnCoding, target: int, m: int, max_lag: int,
                    n_views: int, seed: int) -> list[View]:
    """Draw n_views distinct m-dimensional views over coding x {0..max_lag}.

    Every view includes (target, lag 0). If the number of valid views is at
    most n_views, enumeration is exhaustive; otherwise views are sampled
    uniformly without replacement, deterministically per seed.
    """
    if n_views < 1:
        raise DataError("n_views must be >= 1")
    if target not in coding.subset:
        raise DataError(f"target column {target} not in coding {coding.code!r}")
    pool = [(v, lag) for v in coding.sorted() for lag in range(max_lag + 1)
            if (v, lag) != (target, 0)]
    if len(pool) < m - 1:
        raise DataError(
            f"cannot build {m}-dimensional views from {len(coding.subset)} "
            f"variables and max_lag={max_lag}")
    total = math.comb(len(pool), m - 1)

    def make(vid, rest):
        return View(id=vid, coords=((target, 0),) + tuple(sorted(rest)))

    if total <= n_views:
        return [make(i, rest) for i, rest in enumerate(itertools.combinations(pool, m - 1))]

    rng = np.random.default_rng(seed)
    chosen: dict[tuple, None] = {}
    while len(chosen) < n_views:
        idx = rng.choice(len(pool), size=m - 1, replace=False)
        rest = tuple(sorted(pool[i] for i in idx))
        chosen.setdefault(rest, None)
    return [make(i, rest) for i, rest in enumerate(chosen)]


def dimension_from_series(s: SeasonalSeries, coding: ColumnCoding, max_lag: int,
                          k1: int = 5, k2: int = 10, multiplier: float = 2.5) -> int:
    """Estimate intrinsic dimension on the full delay-coordinate cloud of the
    training data (all coding variables at lags 0..max_lag) and size the map."""
    full_view = View(id=-1, coords=tuple(
        (v, lag) for v in coding.sorted() for lag in range(max_lag + 1)))
    data = build_delay_map(s, full_view, train_only=True)
    est = levina_bickel_dim(data.points, k1=k1, k2=k2)
    return embedding_dim(est, multiplier=multiplier)
