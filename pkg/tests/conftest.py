import numpy as np
import pytest

from tapestry.dataio import SeasonalSeries


def make_series(values, variables=None, start_year=2000, train_through=None):
    """Wrap a (n_seasons, V) array as a SeasonalSeries (whole years only)."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    n_years = len(values) // 4
    values = values[: n_years * 4].reshape(n_years, 4, -1)
    if variables is None:
        variables = tuple(f"v{i+1}" for i in range(values.shape[2]))
    return SeasonalSeries(
        variables=tuple(variables),
        years=tuple(range(start_year, start_year + n_years)),
        values=values,
        train_through=train_through,
    )


def rotation_series(n_seasons=200, theta=0.7, train_frac=0.8, start_year=2000):
    """Noise-free linear rotation system: x=cos, y=sin of a steady phase.

    One-step values are exactly linear in the current (x, y) state, so
    every thread should hit the truth when residual pools are zero.
    """
    t = np.arange(n_seasons)
    values = np.column_stack([np.cos(theta * t), np.sin(theta * t)])
    s = make_series(values, variables=("x", "y"), start_year=start_year)
    train_years = int(s.n_years * train_frac)
    return SeasonalSeries(
        variables=s.variables, years=s.years, values=s.values,
        train_through=s.years[0] + train_years - 1,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
