"""Thread ensembles: build, reweight against observations, and score
weighted predictive densities into triangular likelihood tables."""
from __future__ import annotations

import io
import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .dataio import SEASONS, ColumnCoding, DataError, SeasonalSeries
from .embedding import (View, build_delay_map, dimension_from_series,
                        embed_query, enumerate_views)
from .neighbors import knn
from .regression import fit_gap_regression, predict_with_residual


@dataclass(frozen=True)
class TapestryConfig:
    k: int = 4                     # max horizon, seasons
    j: int = 20                    # neighborhood size
    n_views: int = 32
    n_draws: int = 8
    max_lag: int = 8
    m: int | None = None           # delay-map size; None -> 2.5x intrinsic dim
    h_bw: float = 0.25             # density window half-width, standardized units
    density_floor: float = 1e-6
    exclusion: int | None = None   # temporal leakage guard; None -> k
    seed: int = 0
    common_residual: bool = False  # one residual index reused across gaps
    dim_k1: int = 5
    dim_k2: int = 10
    dim_multiplier: float = 2.5

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}

    @classmethod
    def from_json(cls, d: dict) -> "TapestryConfig":
        return cls(**d)


@dataclass(frozen=True)
class Thread:
    view_id: int
    draw: int
    predictions: tuple[float, ...]   # horizons 1..k
    weight: float


@dataclass(frozen=True)
class Tapestry:
    anchor: tuple[int, str]          # (year, season label)
    target: int                      # 1-based column
    target_name: str
    k: int
    predictions: np.ndarray          # (N, k)
    view_ids: np.ndarray             # (N,)
    draw_ids: np.ndarray             # (N,)
    weights: np.ndarray              # (N,) on the simplex
    views: tuple[View, ...]
    config: TapestryConfig
    observation_log: tuple[tuple[int, float], ...] = ()
    degeneracy_events: int = 0
    category_bounds: np.ndarray | None = None   # (4, 2) per-season terciles

    @property
    def n_threads(self) -> int:
        return len(self.weights)

    @property
    def anchor_season_index(self) -> int:
        return SEASONS.index(self.anchor[1])

    def horizon_season(self, horizon: int) -> str:
        return SEASONS[(self.anchor_season_index + horizon) % 4]

    def threads(self) -> list[Thread]:
        return [Thread(int(v), int(d), tuple(p), float(w))
                for v, d, p, w in zip(self.view_ids, self.draw_ids,
                                      self.predictions, self.weights)]

    def to_json(self) -> dict:
        return {
            "anchor": [self.anchor[0], self.anchor[1]],
            "target": self.target,
            "target_name": self.target_name,
            "k": self.k,
            "predictions": self.predictions.tolist(),
            "view_ids": self.view_ids.tolist(),
            "draw_ids": self.draw_ids.tolist(),
            "weights": self.weights.tolist(),
            "views": [v.to_json() for v in self.views],
            "config": self.config.to_json(),
            "observation_log": [[h, v] for h, v in self.observation_log],
            "degeneracy_events": self.degeneracy_events,
            "category_bounds": None if self.category_bounds is None
                               else self.category_bounds.tolist(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Tapestry":
        return cls(
            anchor=(int(d["anchor"][0]), str(d["anchor"][1])),
            target=int(d["target"]),
            target_name=str(d["target_name"]),
            k=int(d["k"]),
            predictions=np.asarray(d["predictions"], dtype=float),
            view_ids=np.asarray(d["view_ids"], dtype=int),
            draw_ids=np.asarray(d["draw_ids"], dtype=int),
            weights=np.asarray(d["weights"], dtype=float),
            views=tuple(View.from_json(v) for v in d["views"]),
            config=TapestryConfig.from_json(d["config"]),
            observation_log=tuple((int(h), float(v)) for h, v in d["observation_log"]),
            degeneracy_events=int(d.get("degeneracy_events", 0)),
            category_bounds=None if d.get("category_bounds") is None
                            else np.asarray(d["category_bounds"], dtype=float),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path) -> "Tapestry":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def training_terciles(series: SeasonalSeries, target: int) -> np.ndarray:
    """Per-season (lower, upper) terciles of the target's training anomalies."""
    n_train_years = (series.train_through - series.years[0] + 1
                     if series.train_through is not None else series.n_years)
    out = np.empty((4, 2))
    for s in range(4):
        vals = series.values[:n_train_years, s, target - 1]
        out[s] = np.quantile(vals, [1.0 / 3.0, 2.0 / 3.0])
    return out


def build_tapestry(series: SeasonalSeries, anchor: tuple[int, int | str],
                   target: int, coding: ColumnCoding,
                   cfg: TapestryConfig = TapestryConfig(),
                   views: list[View] | None = None) -> Tapestry:
    """Assemble the full thread ensemble for one forecast anchor.

    For each view: embed the training data, embed the anchor, find the j
    nearest training trajectories (restricted to anchors with all k ahead
    values inside training), fit per-gap Cp-selected regressions, and emit
    n_draws residual-resampled threads. Initial weights are uniform.
    """
    if series.train_through is None:
        raise DataError("series has no training split; run standardize_and_anomalize")
    anchor_t = series.time_index(anchor[0], anchor[1])
    anchor_label = (anchor[0], anchor[1] if isinstance(anchor[1], str)
                    else SEASONS[anchor[1]])
    m = cfg.m
    if m is None:
        m = dimension_from_series(series, coding, cfg.max_lag,
                                  k1=cfg.dim_k1, k2=cfg.dim_k2,
                                  multiplier=cfg.dim_multiplier)
    if views is None:
        views = enumerate_views(coding, target, m, cfg.max_lag,
                                cfg.n_views, cfg.seed)
    exclusion = cfg.k if cfg.exclusion is None else cfg.exclusion
    t_train = series.n_train_times()

    preds, view_ids, draw_ids = [], [], []
    for view in views:
        data = build_delay_map(series, view, train_only=True)
        valid = data.anchors <= t_train - 1 - cfg.k
        query = embed_query(series, view, anchor_t)
        hood = knn(data, query, cfg.j, query_anchor=anchor_t,
                   exclusion=exclusion, valid=valid)
        models = [fit_gap_regression(series, data, hood, target, gap)
                  for gap in range(1, cfg.k + 1)]
        for draw in range(cfg.n_draws):
            rng = np.random.default_rng([cfg.seed, view.id, draw])
            if cfg.common_residual:
                idx = int(rng.integers(cfg.j))
                row = [predict_with_residual(mod, query, rng, residual_index=idx)
                       for mod in models]
            else:
                row = [predict_with_residual(mod, query, rng) for mod in models]
            preds.append(row)
            view_ids.append(view.id)
            draw_ids.append(draw)

    n = len(preds)
    return Tapestry(
        anchor=anchor_label,
        target=target,
        target_name=series.variables[target - 1],
        k=cfg.k,
        predictions=np.asarray(preds, dtype=float),
        view_ids=np.asarray(view_ids, dtype=int),
        draw_ids=np.asarray(draw_ids, dtype=int),
        weights=np.full(n, 1.0 / n),
        views=tuple(views),
        config=cfg,
        category_bounds=training_terciles(series, target),
    )


def reweight(t: Tapestry, horizon: int, observed: float) -> Tapestry:
    """Multiply each thread's weight by the standard normal kernel of its
    horizon residual and renormalize; returns a new snapshot.

    Total underflow (no thread anywhere near the observation) resets the
    weights to uniform and counts a degeneracy event.
    """
    expected = (t.observation_log[-1][0] + 1) if t.observation_log else 1
    if horizon != expected:
        raise DataError(f"horizon {horizon} out of order; next unapplied is {expected}")
    if horizon > t.k:
        raise DataError(f"horizon {horizon} exceeds k={t.k}")
    resid = observed - t.predictions[:, horizon - 1]
    mult = np.exp(-0.5 * resid ** 2)
    w = t.weights * mult
    total = w.sum()
    events = t.degeneracy_events
    if not np.isfinite(total) or total <= 0.0:
        warnings.warn(f"weight degeneracy at horizon {horizon}; resetting to uniform")
        w = np.full(t.n_threads, 1.0 / t.n_threads)
        events += 1
    else:
        w = w / total
    return replace(t, weights=w, observation_log=t.observation_log + ((horizon, observed),),
                   degeneracy_events=events)


def predictive_density(t: Tapestry, horizon: int, y: float,
                       h_bw: float | None = None,
                       floor: float | None = None) -> float:
    """Derivative of the weighted empirical distribution function in a
    +/- h_bw window around y, floored so logs stay finite."""
    h_bw = t.config.h_bw if h_bw is None else h_bw
    floor = t.config.density_floor if floor is None else floor
    if h_bw <= 0:
        raise DataError("h_bw must be positive")
    inside = np.abs(t.predictions[:, horizon - 1] - y) <= h_bw
    f = float(t.weights[inside].sum()) / (2.0 * h_bw)
    return max(f, floor)


@dataclass(frozen=True)
class LikelihoodTable:
    """Triangular stage x horizon log-likelihood sums over test years.

    cells[s, h-1] is populated only for stage s < horizon h (stage s means
    observations for horizons 1..s have been applied); other entries NaN.
    """
    k: int
    target_name: str
    anchor_season: str               # season of the forecast anchors
    years: tuple[int, ...]           # test years (anchor years)
    cells: np.ndarray                # (k, k) [stage, horizon-1]
    per_year: np.ndarray             # (n_years, k, k) log terms
    horizon_seasons: tuple[str, ...]  # season label per horizon 1..k

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "target_name": self.target_name,
            "anchor_season": self.anchor_season,
            "years": list(self.years),
            "cells": np.where(np.isnan(self.cells), None, self.cells).tolist(),
            "per_year": np.where(np.isnan(self.per_year), None, self.per_year).tolist(),
            "horizon_seasons": list(self.horizon_seasons),
        }

    @classmethod
    def from_json(cls, d: dict) -> "LikelihoodTable":
        def nanify(x):
            return np.asarray(np.where(np.equal(x, None), np.nan, x), dtype=float)
        return cls(
            k=int(d["k"]),
            target_name=str(d["target_name"]),
            anchor_season=str(d["anchor_season"]),
            years=tuple(int(y) for y in d["years"]),
            cells=nanify(np.asarray(d["cells"], dtype=object)),
            per_year=nanify(np.asarray(d["per_year"], dtype=object)),
            horizon_seasons=tuple(d["horizon_seasons"]),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path) -> "LikelihoodTable":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_csv(self) -> str:
        """Triangular CSV: one row per stage, columns from the longest
        horizon down to 1 season ahead, literal NA off the triangle."""
        buf = io.StringIO()
        header = ["stage"] + [f"{self.horizon_seasons[h - 1]}_{h}season"
                              for h in range(self.k, 0, -1)]
        buf.write(",".join(header) + "\n")
        for s in range(self.k):
            row = [str(s)]
            for h in range(self.k, 0, -1):
                v = self.cells[s, h - 1]
                row.append("NA" if np.isnan(v) else repr(float(v)))
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


def evaluate_season(series: SeasonalSeries, target: int, coding: ColumnCoding,
                    cfg: TapestryConfig, season: int | str,
                    test_years) -> "LikelihoodTable":
    """Build one tapestry per test year anchored at (year, season) and score
    it against the observed anomalies at horizons 1..k."""
    if isinstance(season, str):
        season = SEASONS.index(season)
    flat = series.flat()
    taps, obs = [], []
    # the intrinsic-dimension estimate is shared across anchors
    cfg_shared = cfg
    if cfg_shared.m is None:
        m = dimension_from_series(series, coding, cfg.max_lag,
                                  k1=cfg.dim_k1, k2=cfg.dim_k2,
                                  multiplier=cfg.dim_multiplier)
        cfg_shared = replace(cfg, m=m)
    views = enumerate_views(coding, target, cfg_shared.m, cfg_shared.max_lag,
                            cfg_shared.n_views, cfg_shared.seed)
    for year in test_years:
        anchor_t = series.time_index(int(year), season)
        if anchor_t + cfg.k >= len(flat):
            raise DataError(
                f"anchor ({year},{SEASONS[season]}) lacks {cfg.k} observed horizons")
        taps.append(build_tapestry(series, (int(year), season), target, coding,
                                   cfg_shared, views=views))
        obs.append(flat[anchor_t + 1: anchor_t + cfg.k + 1, target - 1])
    return likelihood_table(taps, np.asarray(obs))


def likelihood_table(tapestries: list[Tapestry], observations: np.ndarray,
                     h_bw: float | None = None,
                     floor: float | None = None) -> LikelihoodTable:
    """Score one tapestry per test year against the observed anomalies.

    observations has shape (n_years, k): the truth at horizons 1..k for each
    year's anchor. Cell (s, h) sums log predictive density at the truth for
    horizon h after reweighting with horizons 1..s; per-year terms are kept
    for the paired inference. NaN truth excludes that (year, horizon).
    """
    observations = np.asarray(observations, dtype=float)
    if not tapestries:
        raise DataError("no tapestries to score")
    k = tapestries[0].k
    if any(t.k != k for t in tapestries):
        raise DataError("all tapestries must share the same k")
    if observations.shape != (len(tapestries), k):
        raise DataError(f"observations shape {observations.shape} != ({len(tapestries)}, {k})")
    n = len(tapestries)
    per_year = np.full((n, k, k), np.nan)
    for yi, tap in enumerate(tapestries):
        t = tap
        for s in range(k):
            if s > 0:
                obs_s = observations[yi, s - 1]
                if np.isnan(obs_s):
                    warnings.warn(f"missing truth at year index {yi}, horizon {s}; "
                                  "stopping reweighting for this year")
                    break
                t = reweight(t, s, obs_s)
            for h in range(s + 1, k + 1):
                truth = observations[yi, h - 1]
                if np.isnan(truth):
                    continue
                per_year[yi, s, h - 1] = np.log(
                    predictive_density(t, h, truth, h_bw=h_bw, floor=floor))
    cells = np.full((k, k), np.nan)
    for s in range(k):
        for h in range(s + 1, k + 1):
            col = per_year[:, s, h - 1]
            if np.all(np.isnan(col)):
                continue
            cells[s, h - 1] = np.nansum(col)
    first = tapestries[0]
    return LikelihoodTable(
        k=k,
        target_name=first.target_name,
        anchor_season=first.anchor[1],
        years=tuple(t.anchor[0] for t in tapestries),
        cells=cells,
        per_year=per_year,
        horizon_seasons=tuple(first.horizon_season(h) for h in range(1, k + 1)),
    )
