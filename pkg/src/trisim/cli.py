"""Command-line interface: derive, fit, diagnose, critical-values, simulate, serve."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import dataio, diagnostics, econometrics, engine
from .dataio import DataError
from .diagnostics import StatisticError
from .econometrics import FitError, ModelSpec
from .engine import ConfigError, EngineError, SimConfig
from .noise import NoiseError, write_matrix_csv

PORT_ENV_VAR = "TRISIM_PORT"

_VALIDATION_ERRORS = (DataError, FitError, ConfigError, NoiseError, StatisticError, EngineError, ValueError)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trisim", description="Annual market model and wealth simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="write derived annual series as CSV")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--outdir", required=True, type=Path)
    p.add_argument("--window", type=int, default=10, help="earnings averaging window")

    p = sub.add_parser("fit", help="fit the model and write its JSON spec")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--fill-seed", type=int, default=0, help="seed for the residual fill")

    p = sub.add_parser("diagnose", help="residual diagnostics report")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--csv", type=Path, help="also write the report as CSV")
    p.add_argument("--residuals-csv", type=Path, help="export the residual matrix (blank = missing)")
    p.add_argument("--filled-csv", type=Path, help="export the fill-completed residual matrix")

    p = sub.add_parser("critical-values", help="simulated white-noise critical values")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--level", required=True, type=float)
    p.add_argument("--reps", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--csv", type=Path)

    p = sub.add_parser("simulate", help="run an ensemble and write its JSON result")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--seed", type=int, help="override the config's master_seed")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", type=Path, help="directory of web UI assets to serve at /")
    p.add_argument("--workers", type=int, default=4, help="path-simulation worker budget")

    return parser


def _load_series(manifest: Path, window: int) -> dict:
    bundle = dataio.load_bundle(manifest)
    return dataio.build_dataset(bundle, window)


def cmd_derive(args: argparse.Namespace) -> int:
    series = _load_series(args.manifest, args.window)
    args.outdir.mkdir(parents=True, exist_ok=True)
    for name, s in sorted(series.items()):
        dataio.write_annual_csv(s, args.outdir / f"{name}.csv")
    print(f"wrote {len(series)} series to {args.outdir}")
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    series = _load_series(args.manifest, args.window)
    model = econometrics.fit_model(series, window=args.window, fill_seed=args.fill_seed)
    model.save(args.out)
    status = "passed" if model.gate.passed else "FAILED"
    print(f"model written to {args.out} (stationarity gate {status})")
    return 0


_REPORT_COLUMNS = ("series", "n", "stdev", "skew", "kurt", "sw_p", "jb_p", "l1_original", "l1_absolute")


def _report_rows(model: ModelSpec) -> list[tuple]:
    rows = []
    matrix = model.residuals
    for name in matrix.series_names:
        column = matrix.column(name)
        report = diagnostics.describe(column[~np.isnan(column)])
        rows.append(
            (
                name,
                report.n,
                report.stdev,
                report.skew,
                report.kurt,
                report.sw_p,
                report.jb_p,
                report.l1_original,
                report.l1_absolute,
            )
        )
    return rows


def _format_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def cmd_diagnose(args: argparse.Namespace) -> int:
    model = ModelSpec.load(args.model)
    rows = _report_rows(model)
    widths = [
        max(len(_REPORT_COLUMNS[i]), max(len(_format_cell(r[i])) for r in rows))
        for i in range(len(_REPORT_COLUMNS))
    ]
    header = "  ".join(c.rjust(w) for c, w in zip(_REPORT_COLUMNS, widths))
    print(header)
    print("-" * len(header))
    for row in rows:
        print("  ".join(_format_cell(v).rjust(w) for v, w in zip(row, widths)))
    corr = model.residuals
    if corr.correlation is not None:
        print()
        print("residual correlations (" + ", ".join(corr.correlation_names) + "):")
        for name, line in zip(corr.correlation_names, corr.correlation):
            print(f"  {name:>12s}  " + " ".join(f"{v:+.3f}" for v in line))
    if args.csv:
        _write_csv(args.csv, _REPORT_COLUMNS, rows)
        print(f"report written to {args.csv}")
    if args.residuals_csv:
        write_matrix_csv(model.residuals, args.residuals_csv)
        print(f"residual matrix written to {args.residuals_csv}")
    if args.filled_csv:
        write_matrix_csv(model.filled_residuals, args.filled_csv)
        print(f"filled residual matrix written to {args.filled_csv}")
    return 0


def _write_csv(path: Path, columns, rows) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def cmd_critical_values(args: argparse.Namespace) -> int:
    table = diagnostics.mc_critical_values(args.n, args.level, args.reps, args.seed)
    columns = ("n", "level", "skew", "kurt", "l1", "replications")
    row = (table.n, table.level, table.skew_crit, table.kurt_crit, table.l1_crit, table.replications)
    print("  ".join(f"{c:>12s}" for c in columns))
    print("  ".join(f"{_format_cell(v):>12s}" for v in row))
    if args.csv:
        _write_csv(args.csv, columns, [row])
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    model = ModelSpec.load(args.model)
    with open(args.config, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
    if args.seed is not None:
        raw["master_seed"] = args.seed
    config = SimConfig.from_dict(raw)
    result = engine.run_ensemble(model, config, workers=args.workers)
    args.out.write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    ruin = f"{result.ruin_probability:.2%}"
    print(f"simulated {config.n_paths} paths over {config.horizon} years; ruin probability {ruin}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    model = ModelSpec.load(args.model)
    app = create_app(model, static_dir=args.static, max_workers=args.workers)
    port = int(os.environ.get(PORT_ENV_VAR, args.port))
    uvicorn.run(app, host=args.host, port=port, log_level="info")
    return 0


_COMMANDS = {
    "derive": cmd_derive,
    "fit": cmd_fit,
    "diagnose": cmd_diagnose,
    "critical-values": cmd_critical_values,
    "simulate": cmd_simulate,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
