"""Monthly CSV ingestion, seasonal aggregation, standardization and anomalies."""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

SEASONS = ("Winter", "Spring", "Summer", "Fall")

# month -> (season index, year offset). December belongs to the following
# winter, so its season-year is the next calendar year.
DEFAULT_SEASON_OF_MONTH = {
    12: (0, 1), 1: (0, 0), 2: (0, 0),
    3: (1, 0), 4: (1, 0), 5: (1, 0),
    6: (2, 0), 7: (2, 0), 8: (2, 0),
    9: (3, 0), 10: (3, 0), 11: (3, 0),
}

MEAN = "MEAN"
SUM = "SUM"


class DataError(ValueError):
    """Input contract violation (bad file, bad schema, degenerate data)."""


@dataclass(frozen=True)
class MonthlyTable:
    variables: tuple[str, ...]
    aggregation: tuple[str, ...]        # MEAN or SUM per variable
    years: np.ndarray                   # (n,) int
    months: np.ndarray                  # (n,) int in 1..12
    values: np.ndarray                  # (n, V) float

    def __post_init__(self):
        if len(self.aggregation) != len(self.variables):
            raise DataError("aggregation tags must match variables")
        for tag in self.aggregation:
            if tag not in (MEAN, SUM):
                raise DataError(f"unknown aggregation tag {tag!r}")


@dataclass(frozen=True)
class SeasonalSeries:
    """Dense (year x season x variable) panel of seasonal values.

    After ``standardize_and_anomalize`` the values are standardized seasonal
    anomalies and the scaling metadata is populated; ``train_through`` marks
    the last training year.
    """
    variables: tuple[str, ...]
    years: tuple[int, ...]              # consecutive calendar years
    values: np.ndarray                  # (n_years, 4, V) float
    scaling_mean: np.ndarray | None = None    # (V,)
    scaling_sd: np.ndarray | None = None      # (V,)
    seasonal_means: np.ndarray | None = None  # (4, V)
    train_through: int | None = None

    @property
    def n_years(self) -> int:
        return len(self.years)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def flat(self) -> np.ndarray:
        """Time-ordered view of shape (n_years*4, V)."""
        return self.values.reshape(self.n_years * 4, self.n_vars)

    def time_index(self, year: int, season: int | str) -> int:
        if isinstance(season, str):
            season = SEASONS.index(season)
        if year not in self.years:
            raise DataError(f"year {year} outside series range")
        return (year - self.years[0]) * 4 + season

    def time_to_anchor(self, t: int) -> tuple[int, str]:
        return self.years[0] + t // 4, SEASONS[t % 4]

    def n_train_times(self) -> int:
        if self.train_through is None:
            return self.n_years * 4
        if self.train_through not in self.years:
            raise DataError(f"train_through year {self.train_through} not in series")
        return (self.train_through - self.years[0] + 1) * 4

    def to_json(self) -> dict:
        def arr(a):
            return None if a is None else np.asarray(a).tolist()
        return {
            "variables": list(self.variables),
            "years": list(self.years),
            "values": self.values.tolist(),
            "scaling_mean": arr(self.scaling_mean),
            "scaling_sd": arr(self.scaling_sd),
            "seasonal_means": arr(self.seasonal_means),
            "train_through": self.train_through,
        }

    @classmethod
    def from_json(cls, d: dict) -> "SeasonalSeries":
        def arr(a):
            return None if a is None else np.asarray(a, dtype=float)
        return cls(
            variables=tuple(d["variables"]),
            years=tuple(int(y) for y in d["years"]),
            values=np.asarray(d["values"], dtype=float),
            scaling_mean=arr(d.get("scaling_mean")),
            scaling_sd=arr(d.get("scaling_sd")),
            seasonal_means=arr(d.get("seasonal_means")),
            train_through=d.get("train_through"),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path) -> "SeasonalSeries":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class ColumnCoding:
    """Variable subset with its display code (paper-style digit string)."""
    subset: frozenset[int]              # 1-based column indices
    code: str

    def sorted(self) -> list[int]:
        return sorted(self.subset)


def load_monthly_csv(path, variables, aggregation) -> MonthlyTable:
    """Load a monthly CSV with header ``year,month,<var1>,...``.

    Missing or non-finite values are rejected; duplicate (year, month) rows
    are an error naming the offending line.
    """
    variables = tuple(variables)
    aggregation = tuple(aggregation)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        expected = ["year", "month", *variables]
        if [h.strip() for h in header] != expected:
            raise DataError(f"{path}: header {header} does not match schema {expected}")
        years, months, rows = [], [], []
        seen = set()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise DataError(f"{path}:{lineno}: expected {len(expected)} fields, got {len(row)}")
            try:
                year = int(row[0])
                month = int(row[1])
                vals = [float(x) for x in row[2:]]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: unparseable number ({exc})") from None
            if not 1 <= month <= 12:
                raise DataError(f"{path}:{lineno}: month {month} out of range")
            if any(not math.isfinite(v) for v in vals):
                raise DataError(f"{path}:{lineno}: missing/non-finite value rejected")
            if (year, month) in seen:
                raise DataError(f"{path}:{lineno}: duplicate month ({year},{month})")
            seen.add((year, month))
            years.append(year)
            months.append(month)
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    order = np.lexsort((months, years))
    return MonthlyTable(
        variables=variables,
        aggregation=aggregation,
        years=np.asarray(years)[order],
        months=np.asarray(months)[order],
        values=np.asarray(rows, dtype=float)[order],
    )


def to_seasonal(m: MonthlyTable, season_map=None) -> SeasonalSeries:
    """Aggregate monthly rows into seasons (MEAN variables averaged, SUM summed).

    Seasons missing any of their 3 months are dropped with a warning; the
    result is trimmed to the longest contiguous run of complete seasons and
    then to whole years (Winter..Fall).
    """
    if season_map is None:
        season_map = DEFAULT_SEASON_OF_MONTH
    buckets: dict[tuple[int, int], list[np.ndarray]] = {}
    for year, month, vals in zip(m.years, m.months, m.values):
        sidx, offset = season_map[int(month)]
        buckets.setdefault((int(year) + offset, sidx), []).append(vals)

    keys = sorted(buckets)
    complete = [key for key in keys if len(buckets[key]) == 3]
    dropped = [key for key in keys if len(buckets[key]) != 3]
    if dropped:
        warnings.warn(f"dropping {len(dropped)} incomplete season(s): {dropped}")
    if not complete:
        raise DataError("no complete seasons in input")

    # longest contiguous run in season-time
    def season_time(key):
        return key[0] * 4 + key[1]

    runs, current = [], [complete[0]]
    for key in complete[1:]:
        if season_time(key) == season_time(current[-1]) + 1:
            current.append(key)
        else:
            runs.append(current)
            current = [key]
    runs.append(current)
    run = max(runs, key=len)
    # trim to whole years: start at Winter, end at Fall
    while run and run[0][1] != 0:
        run = run[1:]
    while run and run[-1][1] != 3:
        run = run[:-1]
    if not run:
        raise DataError("no complete year of seasons in input")

    years = tuple(range(run[0][0], run[-1][0] + 1))
    V = len(m.variables)
    values = np.empty((len(years), 4, V))
    for yi, year in enumerate(years):
        for sidx in range(4):
            if (year, sidx) not in buckets or len(buckets[(year, sidx)]) != 3:
                raise DataError(f"interior season gap at ({year},{SEASONS[sidx]})")
            block = np.asarray(buckets[(year, sidx)])
            for vi, tag in enumerate(m.aggregation):
                col = block[:, vi]
                values[yi, sidx, vi] = col.mean() if tag == MEAN else col.sum()
    return SeasonalSeries(variables=m.variables, years=years, values=values)


def standardize_and_anomalize(s: SeasonalSeries, train_through: int) -> SeasonalSeries:
    """Scale each variable to mean 0 / sd 1 over the training years, then
    subtract per-(season, variable) training means.

    Scaling parameters come from training years only and are reused
    unchanged for test years.
    """
    if train_through not in s.years:
        raise DataError(f"train_through year {train_through} not in series years")
    n_train = s.years.index(train_through) + 1
    if n_train < 2:
        raise DataError("need at least 2 training years")
    train = s.values[:n_train]                     # (n_train, 4, V)
    mean = train.reshape(-1, s.n_vars).mean(axis=0)
    sd = train.reshape(-1, s.n_vars).std(axis=0, ddof=0)
    for vi, sdv in enumerate(sd):
        if sdv <= 0:
            raise DataError(f"variable {s.variables[vi]!r} has zero training sd")
    scaled = (s.values - mean) / sd
    seasonal_means = scaled[:n_train].mean(axis=0)  # (4, V)
    anomalies = scaled - seasonal_means
    return replace(
        s,
        values=anomalies,
        scaling_mean=mean,
        scaling_sd=sd,
        seasonal_means=seasonal_means,
        train_through=train_through,
    )


def parse_subset_code(code: str, n_vars: int) -> ColumnCoding:
    """Parse a paper-style column code: digits ("127") or the literal "1-9"."""
    if code == "1-9":
        if n_vars < 9:
            raise DataError(f'code "1-9" needs 9 variables, have {n_vars}')
        return ColumnCoding(subset=frozenset(range(1, 10)), code=code)
    if not code or not code.isdigit():
        raise DataError(f"bad subset code {code!r}: expected digits or '1-9'")
    idx = [int(ch) for ch in code]
    if any(i == 0 for i in idx):
        raise DataError(f"bad subset code {code!r}: digit 0 not allowed")
    if any(i > n_vars for i in idx):
        raise DataError(f"bad subset code {code!r}: index exceeds {n_vars} variables")
    if len(set(idx)) != len(idx):
        raise DataError(f"bad subset code {code!r}: repeated digit")
    return ColumnCoding(subset=frozenset(idx), code=code)
