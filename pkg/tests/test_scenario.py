import numpy as np
import pytest

from conftest import rotation_series
from tapestry.dataio import ColumnCoding
from tapestry.scenario import (CategoryBounds, ScenarioError,
                               apply_assignments, categorize,
                               condition_on_category, conditional_summary,
                               scenario_from_tapestry)
from tapestry.threads import TapestryConfig, build_tapestry, predictive_density
from test_threads import make_tapestry


def bounds(lo=-0.43, hi=0.43):
    return CategoryBounds(np.tile([lo, hi], (4, 1)))


def scenario(preds, weights, alpha=0.1, lo=-0.43, hi=0.43):
    tap = make_tapestry(preds, weights)
    from tapestry.scenario import ScenarioState
    return ScenarioState(tapestry=tap, bounds=bounds(lo, hi), alpha=alpha)


class TestCategorize:
    def test_below_lower(self):
        assert categorize(-1.0, -0.43, 0.43) == "Low"

    def test_boundary_is_medium(self):
        assert categorize(-0.43, -0.43, 0.43) == "Medium"

    def test_empirical_terciles_of_normal(self, rng):
        sample = rng.normal(size=20_000)
        lo, hi = np.quantile(sample, [1 / 3, 2 / 3])
        assert lo == pytest.approx(-0.4307, abs=0.03)
        assert hi == pytest.approx(0.4307, abs=0.03)
        assert categorize(1.0, lo, hi) == "High"


class TestConditionOnCategory:
    def test_all_in_category_unchanged(self, rng):
        preds = np.full((10, 2), 2.0)       # all High
        w = rng.uniform(size=10)
        w /= w.sum()
        st = scenario(preds, w)
        out = condition_on_category(st, 1, "High")
        assert np.allclose(out.current_weights(), w, atol=1e-12)

    def test_alpha_zero_empty_category_errors(self):
        st = scenario(np.full((5, 2), 2.0), np.full(5, 0.2), alpha=0.0)
        with pytest.raises(ScenarioError, match="alpha"):
            condition_on_category(st, 1, "Low")

    def test_hand_computed_reweighting(self):
        preds = np.array([[2.0], [0.0], [-2.0], [2.0], [0.0],
                          [-2.0], [2.0], [0.0], [-2.0], [2.0]])
        w = np.full(10, 0.1)
        st = scenario(preds, w, alpha=0.1)
        out = condition_on_category(st, 1, "High")
        # multiplier (1+0.1)/1.3 for the 4 High threads, 0.1/1.3 otherwise
        raw = np.where(preds[:, 0] > 0.43, 1.1, 0.1) * 0.1 / 1.3
        expect = raw / raw.sum()
        assert np.allclose(out.current_weights(), expect, atol=1e-12)

    def test_duplicate_horizon_rejected(self):
        st = scenario(np.full((5, 2), 2.0), np.full(5, 0.2))
        st = condition_on_category(st, 1, "High")
        with pytest.raises(ScenarioError, match="already"):
            condition_on_category(st, 1, "Low")

    def test_order_consistency(self, rng):
        preds = rng.normal(size=(30, 3))
        w = np.full(30, 1 / 30)
        st = scenario(preds, w)
        ab = apply_assignments(st, [(1, "High"), (2, "Low")])
        ba = apply_assignments(st, [(2, "Low"), (1, "High")])
        assert np.allclose(ab.current_weights(), ba.current_weights(), atol=1e-12)

    def test_large_alpha_converges_to_unconditioned(self, rng):
        preds = rng.normal(size=(30, 2))
        w = rng.uniform(size=30)
        w /= w.sum()
        st = scenario(preds, w, alpha=1e8)
        out = condition_on_category(st, 1, "High")
        assert np.allclose(out.current_weights(), w, atol=1e-6)


class TestConditionalSummary:
    def test_category_probs_sum_to_one(self, rng):
        st = scenario(rng.normal(size=(40, 2)), np.full(40, 1 / 40))
        out = conditional_summary(st, 2)
        assert sum(out["category_probs"].values()) == pytest.approx(1.0, abs=1e-12)

    def test_symmetric_histogram(self):
        # range padded past the data so no prediction sits on a bin edge
        preds = np.concatenate([np.linspace(-2, 2, 21)])[:, None]
        st = scenario(preds, np.full(21, 1 / 21))
        out = conditional_summary(st, 1, bins=7, value_range=(-2.1, 2.1))
        wts = out["bin_weights"]
        assert np.allclose(wts, wts[::-1], atol=1e-12)

    def test_matches_predictive_density_without_assignments(self, rng):
        preds = rng.normal(size=(60, 2))
        w = rng.uniform(size=60)
        w /= w.sum()
        tap = make_tapestry(preds, w)
        from tapestry.scenario import ScenarioState
        st = ScenarioState(tapestry=tap, bounds=bounds(), alpha=0.1)
        # pad the range so the extreme predictions are interior to the
        # outer bins; points exactly on the range limits fall out of the
        # closed boxcar window under float rounding
        lo, hi = preds[:, 0].min() - 0.05, preds[:, 0].max() + 0.05
        out = conditional_summary(st, 1, bins=8, value_range=(lo, hi))
        edges = np.asarray(out["bin_edges"])
        for b in range(8):
            mid = (edges[b] + edges[b + 1]) / 2
            width = edges[b + 1] - edges[b]
            dens = predictive_density(tap, 1, mid, h_bw=width / 2, floor=0.0)
            # histogram bin weight equals the integral of the window density
            assert out["bin_weights"][b] == pytest.approx(dens * width, abs=1e-9)


class TestEndToEnd:
    def test_tapestry_carries_training_terciles(self):
        s = rotation_series()
        coding = ColumnCoding(subset=frozenset({1, 2}), code="12")
        cfg = TapestryConfig(k=2, j=12, n_views=4, n_draws=10, max_lag=2, m=2, seed=1)
        tap = build_tapestry(s, (s.years[-3], "Spring"), 1, coding, cfg)
        st = scenario_from_tapestry(tap)
        out = condition_on_category(st, 1, "High")
        assert abs(out.current_weights().sum() - 1.0) < 1e-12
