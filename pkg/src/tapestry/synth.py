"""Synthetic open chaotic benchmarks: Lorenz-63 under RK4 with measurement
noise and boundary kicks, and a linear AR(1) control with a known predictive
density."""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .dataio import MEAN, SEASONS, DataError, SeasonalSeries

LORENZ_SIGMA = 10.0
LORENZ_RHO = 28.0
LORENZ_BETA = 8.0 / 3.0


@dataclass(frozen=True)
class SynthConfig:
    system: str = "lorenz63"            # or "noisy-AR-control"
    dt: float = 0.01
    steps_per_season: int = 25
    noise_sd: float = 0.1               # fraction of each variable's latent sd
    kick_sd: float = 0.0                # boundary perturbation, same scale
    seed: int = 0
    ar_phi: float = 0.7                 # AR(1) control parameters
    ar_sigma: float = 1.0
    start_year: int = 2000

    def __post_init__(self):
        if self.dt <= 0:
            raise DataError("step size must be positive")
        if self.noise_sd < 0 or self.kick_sd < 0:
            raise DataError("noise sds must be >= 0")
        if self.system not in ("lorenz63", "noisy-AR-control"):
            raise DataError(f"unknown system {self.system!r}")


@dataclass(frozen=True)
class SynthResult:
    series: SeasonalSeries              # observed (noisy) seasonal values
    latent: np.ndarray                  # (n_seasons_kept, V) noise-free states
    config: SynthConfig


def _lorenz_rhs(s: np.ndarray) -> np.ndarray:
    x, y, z = s
    return np.array([LORENZ_SIGMA * (y - x),
                     x * (LORENZ_RHO - z) - y,
                     x * y - LORENZ_BETA * z])


def rk4_step(s: np.ndarray, dt: float) -> np.ndarray:
    k1 = _lorenz_rhs(s)
    k2 = _lorenz_rhs(s + 0.5 * dt * k1)
    k3 = _lorenz_rhs(s + 0.5 * dt * k2)
    k4 = _lorenz_rhs(s + dt * k3)
    return s + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def lorenz_trajectory(n_steps: int, dt: float,
                      initial=(1.0, 1.0, 1.0), transient: int = 1000,
                      kicks: np.ndarray | None = None,
                      kick_every: int | None = None) -> np.ndarray:
    """Integrate Lorenz-63 for n_steps after a transient; optional state kicks
    applied every `kick_every` steps (open-system perturbation)."""
    s = np.asarray(initial, dtype=float)
    # overflow is handled by the divergence check below, not by warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(transient):
            s = rk4_step(s, dt)
        out = np.empty((n_steps, 3))
        ki = 0
        for i in range(n_steps):
            s = rk4_step(s, dt)
            if kicks is not None and kick_every and (i + 1) % kick_every == 0:
                s = s + kicks[ki]
                ki += 1
            # the finite check matters: overflow turns into NaN, which any
            # magnitude comparison would silently pass
            if not np.all(np.isfinite(s)) or np.max(np.abs(s)) > 1e6:
                raise DataError(
                    f"trajectory diverged at step {i}; reduce the step size")
            out[i] = s
    return out


def _seasons_to_series(values: np.ndarray, variables, start_year: int) -> SeasonalSeries:
    n_years = len(values) // 4
    if n_years < 1:
        raise DataError("need at least 4 seasons")
    vals = values[: n_years * 4].reshape(n_years, 4, -1)
    years = tuple(range(start_year, start_year + n_years))
    return SeasonalSeries(variables=tuple(variables), years=years, values=vals)


def generate(cfg: SynthConfig, n_seasons: int) -> SynthResult:
    """Generate an observed seasonal panel from the configured system.

    Lorenz-63: RK4 at cfg.dt, one "season" per cfg.steps_per_season steps,
    states subsampled at season ends, iid Gaussian measurement noise scaled
    by each variable's latent sd, optional between-season kicks.
    Deterministic per seed.
    """
    if n_seasons < 50:
        raise DataError("n_seasons must be >= 50")
    rng = np.random.default_rng(cfg.seed)
    if cfg.system == "lorenz63":
        n_steps = n_seasons * cfg.steps_per_season
        n_kicks = n_seasons
        # scale kicks against the attractor's typical spread
        ref_sd = np.array([7.9, 9.0, 8.6])
        kicks = (rng.normal(size=(n_kicks, 3)) * cfg.kick_sd * ref_sd
                 if cfg.kick_sd > 0 else None)
        traj = lorenz_trajectory(n_steps, cfg.dt, kicks=kicks,
                                 kick_every=cfg.steps_per_season)
        latent = traj[cfg.steps_per_season - 1::cfg.steps_per_season][:n_seasons]
        variables = ("x", "y", "z")
    else:
        latent = np.empty((n_seasons, 1))
        x = 0.0
        # burn in to the stationary distribution
        for _ in range(200):
            x = cfg.ar_phi * x + cfg.ar_sigma * rng.normal()
        for i in range(n_seasons):
            x = cfg.ar_phi * x + cfg.ar_sigma * rng.normal()
            latent[i, 0] = x
        variables = ("x",)
    signal_sd = latent.std(axis=0, ddof=0)
    noise = rng.normal(size=latent.shape) * cfg.noise_sd * signal_sd
    observed = latent + noise
    series = _seasons_to_series(observed, variables, cfg.start_year)
    kept = series.n_years * 4
    return SynthResult(series=series, latent=latent[:kept], config=cfg)


def to_monthly_csv(series: SeasonalSeries) -> str:
    """Render a seasonal series as the monthly CSV contract (each seasonal
    value replicated across its 3 months, MEAN aggregation), so the synth
    output feeds the same ingestion path as real data."""
    buf = io.StringIO()
    buf.write("year,month," + ",".join(series.variables) + "\n")
    # months of (season_year, season): Winter = Dec(prev), Jan, Feb ...
    season_months = {0: [(-1, 12), (0, 1), (0, 2)],
                     1: [(0, 3), (0, 4), (0, 5)],
                     2: [(0, 6), (0, 7), (0, 8)],
                     3: [(0, 9), (0, 10), (0, 11)]}
    for yi, year in enumerate(series.years):
        for sidx in range(4):
            for offset, month in season_months[sidx]:
                vals = ",".join(repr(float(v)) for v in series.values[yi, sidx])
                buf.write(f"{year + offset},{month},{vals}\n")
    return buf.getvalue()


def ar1_predictive_logdensity(x_now: float, x_next: float,
                              phi: float, sigma: float) -> float:
    """Closed-form one-step log predictive density of the AR(1) latent process."""
    resid = x_next - phi * x_now
    return float(-0.5 * np.log(2 * np.pi * sigma ** 2) - 0.5 * (resid / sigma) ** 2)
