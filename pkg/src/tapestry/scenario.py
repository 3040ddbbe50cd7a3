"""Three-category what-if conditioning of a thread ensemble (Low/Medium/High
climatological terciles with pseudo-count smoothing)."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .threads import Tapestry

CATEGORIES = ("Low", "Medium", "High")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class CategoryBounds:
    """Per-season (lower, upper) tercile bounds of training anomalies."""
    bounds: np.ndarray           # (4, 2)

    def __post_init__(self):
        b = np.asarray(self.bounds, dtype=float)
        if b.shape != (4, 2) or np.any(b[:, 0] >= b[:, 1]):
            raise ScenarioError("bounds must be (4,2) with lower < upper per season")

    def for_season(self, season_index: int) -> tuple[float, float]:
        lo, hi = self.bounds[season_index % 4]
        return float(lo), float(hi)


def categorize(value: float, lower: float, upper: float) -> str:
    """Low below the lower tercile, High above the upper; boundaries are Medium."""
    if value < lower:
        return "Low"
    if value > upper:
        return "High"
    return "Medium"


@dataclass(frozen=True)
class ScenarioState:
    tapestry: Tapestry
    bounds: CategoryBounds
    alpha: float                               # pseudo-count smoothing >= 0
    assignments: tuple[tuple[int, str], ...] = ()
    weights: np.ndarray | None = None          # conditioned; None -> tapestry weights

    def __post_init__(self):
        if self.alpha < 0:
            raise ScenarioError("alpha must be >= 0")

    def current_weights(self) -> np.ndarray:
        return self.tapestry.weights if self.weights is None else self.weights

    def horizon_categories(self, horizon: int) -> np.ndarray:
        """Category of every thread's prediction at the given horizon."""
        sidx = (self.tapestry.anchor_season_index + horizon) % 4
        lo, hi = self.bounds.for_season(sidx)
        preds = self.tapestry.predictions[:, horizon - 1]
        cats = np.full(len(preds), "Medium", dtype=object)
        cats[preds < lo] = "Low"
        cats[preds > hi] = "High"
        return cats


def scenario_from_tapestry(t: Tapestry, alpha: float = 0.1) -> ScenarioState:
    if t.category_bounds is None:
        raise ScenarioError("tapestry carries no category bounds")
    return ScenarioState(tapestry=t, bounds=CategoryBounds(t.category_bounds),
                         alpha=alpha)


def condition_on_category(st: ScenarioState, horizon: int, cat: str) -> ScenarioState:
    """Reweight threads as if `cat` occurred at `horizon`: each weight is
    multiplied by (1{thread in cat} + alpha)/(1 + 3*alpha), then renormalized."""
    if cat not in CATEGORIES:
        raise ScenarioError(f"unknown category {cat!r}")
    if not 1 <= horizon <= st.tapestry.k:
        raise ScenarioError(f"horizon {horizon} out of range 1..{st.tapestry.k}")
    if any(h == horizon for h, _ in st.assignments):
        raise ScenarioError(f"horizon {horizon} already assigned")
    match = st.horizon_categories(horizon) == cat
    mult = (match.astype(float) + st.alpha) / (1.0 + 3.0 * st.alpha)
    w = st.current_weights() * mult
    total = w.sum()
    if total <= 0.0:
        raise ScenarioError(
            f"no thread falls in {cat} at horizon {horizon} and alpha=0; "
            "use alpha > 0")
    return replace(st, weights=w / total,
                   assignments=st.assignments + ((horizon, cat),))


def apply_assignments(st: ScenarioState, assignments) -> ScenarioState:
    """Apply a list of (horizon, category) assignments in order."""
    for horizon, cat in assignments:
        st = condition_on_category(st, int(horizon), str(cat))
    return st


def conditional_summary(st: ScenarioState, horizon: int,
                        bins: int = 20,
                        value_range: tuple[float, float] | None = None) -> dict:
    """Weighted histogram of thread predictions at `horizon` under the
    conditioned weights, plus Low/Medium/High probabilities."""
    if not 1 <= horizon <= st.tapestry.k:
        raise ScenarioError(f"horizon {horizon} out of range 1..{st.tapestry.k}")
    w = st.current_weights()
    preds = st.tapestry.predictions[:, horizon - 1]
    if value_range is None:
        lo, hi = float(preds.min()), float(preds.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
    else:
        lo, hi = value_range
    counts, edges = np.histogram(preds, bins=bins, range=(lo, hi), weights=w)
    cats = st.horizon_categories(horizon)
    probs = {c: float(w[cats == c].sum()) for c in CATEGORIES}
    total = sum(probs.values())
    if total > 0:
        probs = {c: v / total for c, v in probs.items()}
    sidx = (st.tapestry.anchor_season_index + horizon) % 4
    lo_b, hi_b = st.bounds.for_season(sidx)
    return {
        "horizon": horizon,
        "season": st.tapestry.horizon_season(horizon),
        "bin_edges": edges.tolist(),
        "bin_weights": counts.tolist(),
        "category_probs": probs,
        "tercile_bounds": [lo_b, hi_b],
    }
