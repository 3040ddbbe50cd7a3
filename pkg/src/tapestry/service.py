"""HTTP facade over a built tapestry for the scenario-explorer UI."""
from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .scenario import (CATEGORIES, ScenarioError, apply_assignments,
                       conditional_summary, scenario_from_tapestry)
from .threads import DataError, Tapestry, reweight


class Assignment(BaseModel):
    horizon: int
    category: str


class ScenarioRequest(BaseModel):
    assignments: list[Assignment] = Field(default_factory=list)
    alpha: float = 0.1
    bins: int = 20
    snapshot: str | None = None


class ObserveRequest(BaseModel):
    horizon: int
    value: float
    snapshot: str | None = None


def create_app(tapestry: Tapestry) -> FastAPI:
    app = FastAPI(title="scenario service", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    snapshots: dict[str, Tapestry] = {"base": tapestry}
    state = {"current": "base", "counter": 0}

    def get_snapshot(snapshot_id: str | None) -> tuple[str, Tapestry]:
        sid = snapshot_id or state["current"]
        if sid not in snapshots:
            raise HTTPException(status_code=400, detail=f"unknown snapshot {sid!r}")
        return sid, snapshots[sid]

    def check_horizon(t: Tapestry, horizon: int) -> None:
        if not 1 <= horizon <= t.k:
            raise HTTPException(status_code=400,
                                detail=f"horizon must be in 1..{t.k}")

    @app.get("/tapestry")
    def tapestry_meta(snapshot: str | None = None):
        sid, t = get_snapshot(snapshot)
        return {
            "snapshot": sid,
            "anchor": {"year": t.anchor[0], "season": t.anchor[1]},
            "k": t.k,
            "n_threads": t.n_threads,
            "target": t.target_name,
            "observed_horizons": [h for h, _ in t.observation_log],
            "horizon_seasons": [t.horizon_season(h) for h in range(1, t.k + 1)],
            "category_bounds": None if t.category_bounds is None
                               else t.category_bounds.tolist(),
        }

    @app.get("/density")
    def density(horizon: int = Query(...), bins: int = 20,
                snapshot: str | None = None):
        _, t = get_snapshot(snapshot)
        check_horizon(t, horizon)
        st = scenario_from_tapestry(t)
        return conditional_summary(st, horizon, bins=bins)

    @app.post("/scenario")
    def scenario(req: ScenarioRequest):
        _, t = get_snapshot(req.snapshot)
        for a in req.assignments:
            check_horizon(t, a.horizon)
            if a.category not in CATEGORIES:
                raise HTTPException(status_code=400,
                                    detail=f"unknown category {a.category!r}")
        try:
            st = scenario_from_tapestry(t, alpha=req.alpha)
            st = apply_assignments(st, [(a.horizon, a.category)
                                        for a in req.assignments])
            assigned = {a.horizon for a in req.assignments}
            horizons = [h for h in range(1, t.k + 1) if h not in assigned]
            return {
                "assignments": [a.model_dump() for a in req.assignments],
                "alpha": req.alpha,
                "horizons": {str(h): conditional_summary(st, h, bins=req.bins)
                             for h in horizons},
            }
        except ScenarioError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None

    @app.post("/observe")
    def observe(req: ObserveRequest):
        sid, t = get_snapshot(req.snapshot)
        check_horizon(t, req.horizon)
        if any(h == req.horizon for h, _ in t.observation_log):
            raise HTTPException(status_code=409,
                                detail=f"horizon {req.horizon} already observed")
        try:
            new_t = reweight(t, req.horizon, req.value)
        except DataError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        state["counter"] += 1
        new_id = f"snap{state['counter']}"
        snapshots[new_id] = new_t
        state["current"] = new_id
        return {"snapshot": new_id, "previous": sid,
                "observed": [[h, v] for h, v in new_t.observation_log],
                "degeneracy_events": new_t.degeneracy_events}

    return app
