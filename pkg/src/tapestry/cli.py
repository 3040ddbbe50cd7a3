"""Command-line driver: ingest -> tapestry/evaluate -> compare/learning -> fdr,
plus the synthetic benchmark generator and the scenario service."""
from __future__ import annotations

import csv
import io
import json
import sys
import tempfile
from pathlib import Path

import click
import numpy as np

from .dataio import (MEAN, SEASONS, SUM, DataError, SeasonalSeries,
                     load_monthly_csv, parse_subset_code,
                     standardize_and_anomalize, to_seasonal)
from .inference import (InferenceError, compare_tables, fdr_select,
                        learning_tests)
from .neighbors import NeighborError
from .regression import RegressionError
from .synth import SynthConfig, generate, to_monthly_csv
from .threads import (LikelihoodTable, TapestryConfig, build_tapestry,
                      evaluate_season)

EXIT_CONTRACT = 2
EXIT_NUMERIC = 3


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_series(path: str) -> SeasonalSeries:
    return SeasonalSeries.from_json(json.loads(_read_text(path)))


def _resolve_target(series: SeasonalSeries, target: str) -> int:
    if target.isdigit():
        idx = int(target)
        if not 1 <= idx <= series.n_vars:
            raise DataError(f"target column {idx} out of range 1..{series.n_vars}")
        return idx
    if target in series.variables:
        return series.variables.index(target) + 1
    raise DataError(f"unknown target {target!r}; variables are {series.variables}")


def _parse_years(spec: str) -> list[int]:
    if "-" in spec:
        a, b = spec.split("-", 1)
        return list(range(int(a), int(b) + 1))
    return [int(spec)]


def _tapestry_config(k, j, n_views, n_draws, max_lag, m, h_bw, seed,
                     common_residual=False) -> TapestryConfig:
    return TapestryConfig(k=k, j=j, n_views=n_views, n_draws=n_draws,
                          max_lag=max_lag, m=m, h_bw=h_bw, seed=seed,
                          common_residual=common_residual)


@click.group()
def cli():
    """Seasonal forecast thread ensembles: build, score, compare, condition."""


@cli.command()
@click.option("--input", "input_path", required=True, help="monthly CSV, or - for stdin")
@click.option("--agg", multiple=True, help="var=MEAN|SUM (default MEAN)")
@click.option("--train-through", type=int, required=True, help="last training year")
@click.option("--out", default="-", help="output series JSON path")
def ingest(input_path, agg, train_through, out):
    """Monthly CSV -> standardized seasonal anomaly series (JSON)."""
    text = _read_text(input_path)
    header = text.splitlines()[0].split(",") if text else []
    if header[:2] != ["year", "month"]:
        raise DataError("CSV header must start with year,month")
    variables = [h.strip() for h in header[2:]]
    tags = {v: MEAN for v in variables}
    for spec in agg:
        if "=" not in spec:
            raise DataError(f"bad --agg {spec!r}; expected var=MEAN|SUM")
        var, tag = spec.split("=", 1)
        if var not in tags:
            raise DataError(f"--agg names unknown variable {var!r}")
        if tag not in (MEAN, SUM):
            raise DataError(f"--agg tag must be MEAN or SUM, got {tag!r}")
        tags[var] = tag
    with tempfile.NamedTemporaryFile("w", suffix=".csv", delete=False) as fh:
        fh.write(text)
        tmp = fh.name
    monthly = load_monthly_csv(tmp, variables, [tags[v] for v in variables])
    Path(tmp).unlink()
    seasonal = to_seasonal(monthly)
    series = standardize_and_anomalize(seasonal, train_through)
    _write_text(out, json.dumps(series.to_json(), indent=1, sort_keys=True) + "\n")


@cli.command()
@click.option("--series", "series_path", required=True)
@click.option("--target", required=True, help="variable name or 1-based column")
@click.option("--coding", required=True, help='column subset code, e.g. "127" or "1-9"')
@click.option("--anchor", required=True, help="year:season, e.g. 2090:Spring")
@click.option("--k", default=4, type=int)
@click.option("--j", default=20, type=int)
@click.option("--n-views", default=32, type=int)
@click.option("--n-draws", default=8, type=int)
@click.option("--max-lag", default=8, type=int)
@click.option("--m", default=None, type=int, help="delay-map size (default: estimated)")
@click.option("--h-bw", default=0.25, type=float)
@click.option("--seed", default=0, type=int)
@click.option("--out", default="-", help="output tapestry JSON path")
def tapestry(series_path, target, coding, anchor, k, j, n_views, n_draws,
             max_lag, m, h_bw, seed, out):
    """Build the thread ensemble for one forecast anchor."""
    series = _load_series(series_path)
    tgt = _resolve_target(series, target)
    code = parse_subset_code(coding, series.n_vars)
    try:
        year_s, season = anchor.split(":")
        year = int(year_s)
        if season not in SEASONS:
            raise ValueError(season)
    except ValueError:
        raise DataError(f"bad --anchor {anchor!r}; expected year:season") from None
    cfg = _tapestry_config(k, j, n_views, n_draws, max_lag, m, h_bw, seed)
    tap = build_tapestry(series, (year, season), tgt, code, cfg)
    _write_text(out, json.dumps(tap.to_json(), indent=1, sort_keys=True) + "\n")


@cli.command()
@click.option("--series", "series_path", required=True)
@click.option("--target", required=True)
@click.option("--coding", required=True)
@click.option("--test-years", required=True, help="anchor year range, e.g. 2080-2088")
@click.option("--season", default=None, help="one starting season (default: all four)")
@click.option("--k", default=4, type=int)
@click.option("--j", default=20, type=int)
@click.option("--n-views", default=32, type=int)
@click.option("--n-draws", default=8, type=int)
@click.option("--max-lag", default=8, type=int)
@click.option("--m", default=None, type=int)
@click.option("--h-bw", default=0.25, type=float)
@click.option("--seed", default=0, type=int)
@click.option("--out", default="-", help="tables JSON path")
@click.option("--csv-dir", default=None, help="also write triangular CSVs here")
def evaluate(series_path, target, coding, test_years, season, k, j, n_views,
             n_draws, max_lag, m, h_bw, seed, out, csv_dir):
    """Score per-season likelihood tables over a range of test anchors."""
    series = _load_series(series_path)
    tgt = _resolve_target(series, target)
    code = parse_subset_code(coding, series.n_vars)
    years = _parse_years(test_years)
    cfg = _tapestry_config(k, j, n_views, n_draws, max_lag, m, h_bw, seed)
    seasons = [season] if season else list(SEASONS)
    for s in seasons:
        if s not in SEASONS:
            raise DataError(f"unknown season {s!r}")
    tables = {s: evaluate_season(series, tgt, code, cfg, s, years) for s in seasons}
    doc = {"tables": {s: t.to_json() for s, t in tables.items()}}
    _write_text(out, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    if csv_dir:
        Path(csv_dir).mkdir(parents=True, exist_ok=True)
        for s, t in tables.items():
            (Path(csv_dir) / f"table_{s}.csv").write_text(t.to_csv())


def _load_tables(path: str) -> dict[str, LikelihoodTable]:
    doc = json.loads(_read_text(path))
    if "tables" in doc:
        return {s: LikelihoodTable.from_json(t) for s, t in sorted(doc["tables"].items())}
    table = LikelihoodTable.from_json(doc)
    return {table.anchor_season: table}


@cli.command()
@click.option("--table-a", required=True)
@click.option("--table-b", required=True)
@click.option("--out", default="-")
def compare(table_a, table_b, out):
    """Model dominance: paired autocovariance-adjusted tests per cell."""
    tabs_a = _load_tables(table_a)
    tabs_b = _load_tables(table_b)
    if set(tabs_a) != set(tabs_b):
        raise DataError("tables cover different seasons")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["season", "horizon", "stage", "loglik_a", "loglik_b",
                "p_value", "dominant"])
    for season in tabs_a:
        ta, tb = tabs_a[season], tabs_b[season]
        for res in compare_tables(ta, tb):
            h, s = res.label
            lla = ta.cells[s, h - 1]
            llb = tb.cells[s, h - 1]
            w.writerow([season, h, s, repr(float(lla)), repr(float(llb)),
                        repr(res.p_two_sided), "a" if lla >= llb else "b"])
    _write_text(out, buf.getvalue())


@cli.command()
@click.option("--table", "table_path", required=True)
@click.option("--out", default="-")
def learning(table_path, out):
    """Learning tests: each stage against stage 0, per horizon."""
    tabs = _load_tables(table_path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["season", "horizon", "stage", "loglik_stage", "loglik_stage0",
                "mean_diff", "t_stat", "p_value"])
    for season, table in tabs.items():
        for res in learning_tests(table):
            h, s = res.label
            w.writerow([season, h, s,
                        repr(float(table.cells[s, h - 1])),
                        repr(float(table.cells[0, h - 1])),
                        repr(res.mean_diff), repr(res.t_stat),
                        repr(res.p_two_sided)])
    _write_text(out, buf.getvalue())


@cli.command()
@click.option("--pvalues", "pvalues_path", required=True,
              help="CSV with a p_value column; other columns become labels")
@click.option("--q", default=0.1, type=float)
@click.option("--dependent/--independent", default=True)
@click.option("--out", default="-")
@click.option("--plot-out", default=None, help="plot-data JSON path")
def fdr(pvalues_path, q, dependent, out, plot_out):
    """False-discovery-rate selection over labeled p-values."""
    text = _read_text(pvalues_path)
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or "p_value" not in reader.fieldnames:
        raise DataError("input CSV needs a p_value column")
    label_cols = [c for c in reader.fieldnames if c != "p_value"]
    labels, ps = [], []
    for row in reader:
        labels.append(tuple(row[c] for c in label_cols))
        ps.append(float(row["p_value"]))
    report = fdr_select(ps, q=q, dependent=dependent, labels=labels)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(label_cols + ["p_value", "rejected"])
    for lab, p, rej in zip(report.labels, report.pvalues, report.rejected):
        w.writerow(list(lab) + [repr(float(p)), int(rej)])
    w.writerow(["ks_stat"] * max(len(label_cols), 1) + [repr(report.ks_stat), ""])
    w.writerow(["ks_p"] * max(len(label_cols), 1) + [repr(report.ks_p), ""])
    _write_text(out, buf.getvalue())
    if plot_out:
        data = report.plot_data()
        data["labels"] = [list(l) for l in data["labels"]]
        _write_text(plot_out, json.dumps(data, indent=1, sort_keys=True) + "\n")


@cli.command()
@click.option("--system", default="lorenz63",
              type=click.Choice(["lorenz63", "noisy-AR-control"]))
@click.option("--seasons", default=400, type=int)
@click.option("--noise", default=0.1, type=float,
              help="measurement noise sd as a fraction of signal sd")
@click.option("--kick", default=0.0, type=float,
              help="between-season state perturbation, same scale")
@click.option("--seed", default=0, type=int)
@click.option("--out", default="-")
def synth(system, seasons, noise, kick, seed, out):
    """Generate a benchmark monthly CSV from a synthetic system."""
    cfg = SynthConfig(system=system, noise_sd=noise, kick_sd=kick, seed=seed)
    result = generate(cfg, seasons)
    _write_text(out, to_monthly_csv(result.series))


@cli.command()
@click.option("--tapestry", "tapestry_path", required=True)
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8040, type=int)
def serve(tapestry_path, host, port):
    """Serve the scenario-conditioning HTTP API over a built tapestry."""
    import uvicorn

    from .service import create_app
    from .threads import Tapestry
    tap = Tapestry.from_json(json.loads(_read_text(tapestry_path)))
    uvicorn.run(create_app(tap), host=host, port=port, log_level="warning")


def main():
    try:
        cli(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(EXIT_CONTRACT)
    except click.ClickException as exc:
        sys.stderr.write(f"error: {exc.format_message()}\n")
        sys.exit(EXIT_CONTRACT)
    except (DataError, InferenceError, ValueError) as exc:
        if isinstance(exc, (NeighborError, RegressionError)):
            sys.stderr.write(f"error: numerical degeneracy: {exc}\n")
            sys.exit(EXIT_NUMERIC)
        sys.stderr.write(f"error: {exc}\n")
        sys.exit(EXIT_CONTRACT)
    except FloatingPointError as exc:
        sys.stderr.write(f"error: numerical degeneracy: {exc}\n")
        sys.exit(EXIT_NUMERIC)


if __name__ == "__main__":
    main()
