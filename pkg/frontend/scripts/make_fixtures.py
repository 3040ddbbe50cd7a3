"""Regenerate test/fixtures.json from the real Python service.

Run from the frontend directory with the tapestry package installed:
    python3 scripts/make_fixtures.py
The fixtures pin service responses for a deterministic ensemble so the UI
tests can assert parity without a live server.
"""
import json
import sys
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from tapestry.dataio import ColumnCoding, SeasonalSeries
from tapestry.service import create_app
from tapestry.threads import TapestryConfig, build_tapestry


def rotation_series(n_seasons=160, theta=0.7, train_frac=0.8):
    """Noise-free rotation benchmark, same shape as the backend test fixture."""
    t = np.arange(n_seasons)
    values = np.column_stack([np.cos(theta * t), np.sin(theta * t)])
    n_years = len(values) // 4
    values = values[: n_years * 4].reshape(n_years, 4, 2)
    years = tuple(range(2000, 2000 + n_years))
    return SeasonalSeries(variables=("x", "y"), years=years, values=values,
                          train_through=years[0] + int(n_years * train_frac) - 1)


def main():
    s = rotation_series()
    coding = ColumnCoding(subset=frozenset({1, 2}), code="12")
    cfg = TapestryConfig(k=4, j=12, n_views=6, n_draws=5, max_lag=3, m=2, seed=2)
    tap = build_tapestry(s, (s.years[-3], "Spring"), 1, coding, cfg)
    client = TestClient(create_app(tap))

    rng = np.random.default_rng(31)
    cats = ("Low", "Medium", "High")
    cases = []
    for _ in range(20):
        horizons = rng.permutation(4)[: rng.integers(0, 4)] + 1
        request = {"assignments": [{"horizon": int(h),
                                    "category": cats[rng.integers(3)]}
                                   for h in horizons],
                   "alpha": 0.1, "bins": 10}
        resp = client.post("/scenario", json=request)
        assert resp.status_code == 200, resp.text
        cases.append({"request": request, "response": resp.json()})

    doc = {
        "meta": client.get("/tapestry").json(),
        "densities": {str(h): client.get("/density",
                                         params={"horizon": h, "bins": 20}).json()
                      for h in range(1, 5)},
        "empty_scenario": client.post("/scenario",
                                      json={"assignments": [],
                                            "alpha": 0.1, "bins": 20}).json(),
        "cases": cases,
    }
    out = Path(__file__).resolve().parent.parent / "test" / "fixtures.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(f"wrote {out} ({len(cases)} scenario cases)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
