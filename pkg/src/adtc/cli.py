"""Command-line entry point and plot-ready writers.

    adtc echo --omega-ratio 0.5 --t-max 500 --out echo.csv
    adtc return --omega-ratio 0.5,10
    adtc omega-sweep --initial special --format json --out sweep.json
    adtc length-sweep --epsilon 1e-3 --lengths 250,10 --omega-abs 1e-2

Times are written in units of T_B, frequencies in units of omega0.
Exit status: 0 success, 1 configuration or I/O error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, build_manifest, parse_config
from .experiments import length_sweep, omega_sweep, run_echo_experiment, run_return_experiment
from .model import ParameterError
from .observables import ObservableSeries, window_mean
from .propagator import ConvergenceError


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.15g}"


def _jsonable(value):
    """Replace NaN with null so the output is strict JSON."""
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return None if math.isnan(value) else value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def manifest_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".manifest.json")


def _emit(text: str, path):
    if path is None or str(path) in ("", "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_table(header, rows, path, fmt, manifest, extra=None):
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        _emit(buf.getvalue(), path)
        if manifest is not None and path not in (None, "", "-"):
            _emit(json.dumps(_jsonable(manifest), indent=1) + "\n", manifest_path(path))
    elif fmt == "json":
        columns = {name: [row[i] for row in rows] for i, name in enumerate(header)}
        doc = dict(extra or {})
        doc["columns"] = columns
        doc["manifest"] = manifest
        _emit(json.dumps(_jsonable(doc), indent=1, allow_nan=False) + "\n", path)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def write_series(series, path=None, fmt: str = "csv", manifest: dict | None = None):
    """Write one or more series sharing a grid.

    CSV: header ``t_over_TB,<label>...`` then one row per sample, with the
    manifest in a sibling ``<stem>.manifest.json``.  JSON: an object with
    ``grid``, ``columns`` and ``manifest``.  ``path=None`` writes to stdout.
    """
    if isinstance(series, ObservableSeries):
        series = [series]
    if not series:
        raise ValueError("nothing to write")
    grid = series[0].grid
    for s in series[1:]:
        if not np.array_equal(s.grid.points, grid.points):
            raise ValueError(f"series {s.label!r} is on a different grid")
    labels = [s.label or f"col{i}" for i, s in enumerate(series)]
    if fmt == "json":
        doc = {
            "grid": grid.points.tolist(),
            "columns": {lab: s.values.tolist() for lab, s in zip(labels, series)},
            "manifest": manifest,
        }
        _emit(json.dumps(_jsonable(doc), indent=1, allow_nan=False) + "\n", path)
        return
    rows = zip(grid.points, *(s.values for s in series))
    _write_table(["t_over_TB", *labels], rows, path, fmt, manifest)


def read_series(path):
    """Read back a file from :func:`write_series`: (t, {label: values}, manifest)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        doc = json.loads(text)
        columns = {k: np.array(v, dtype=float) for k, v in doc["columns"].items()}
        return np.array(doc["grid"], dtype=float), columns, doc.get("manifest")
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    columns = {name: body[:, i + 1] for i, name in enumerate(header[1:])}
    manifest = None
    sibling = manifest_path(path)
    if sibling.exists():
        manifest = json.loads(sibling.read_text(encoding="utf-8"))
    return body[:, 0], columns, manifest


SWEEP_COLUMNS = (
    "variance", "echo_mean", "period_over_TB", "regime", "is_argmax", "omega_ratio",
    "Omega", "g", "delta_omega", "n_modes", "epsilon", "gamma", "length_over_lambda0",
)


def write_sweep(result, path=None, fmt: str = "csv", manifest: dict | None = None):
    """One row per sweep point, carrying the exact parameters of that point."""
    try:
        best = result.argmax_index
    except ValueError:
        best = -1
    rows = []
    for i, pt in enumerate(result.points):
        p = pt.params
        rows.append([
            pt.axis_value, pt.variance, pt.echo_mean, pt.period, pt.regime.kind,
            i == best, p.omega_ratio, p.Omega, p.g, p.delta_omega, p.n_modes,
            p.epsilon, pt.gamma, pt.length,
        ])
    header = [result.axis_name, *SWEEP_COLUMNS]
    argmax = float(result.axis[best]) if best >= 0 else None
    extra = {"axis": result.axis_name, "argmax_variance": argmax}
    _write_table(header, rows, path, fmt, manifest, extra)


def _label(prefix: str, ratios, r) -> str:
    return prefix if len(ratios) == 1 else f"{prefix}_r{r:g}"


def _run(config: RunConfig):
    """Execute ``config``; returns (kind of payload, payload, results)."""
    ratios = config.omega_ratio
    if config.kind == "echo":
        columns, results = [], {"echo_late_mean": []}
        for r in ratios:
            spec = config.experiment(r)
            echo, _, _ = run_echo_experiment(spec)
            columns.append(ObservableSeries(echo.grid, echo.values, _label("echo", ratios, r)))
            late = window_mean(echo, *spec.late_window) if spec.covers_late_window() else None
            results["echo_late_mean"].append(late)
        return "series", columns, results
    if config.kind == "return":
        columns = []
        results = {"period_over_TB": [], "decay_rate_per_TB": []}
        for r in ratios:
            p, period, rate = run_return_experiment(config.experiment(r))
            columns.append(ObservableSeries(p.grid, p.values, _label("return", ratios, r)))
            results["period_over_TB"].append(period.period if period else None)
            results["decay_rate_per_TB"].append(rate)
        return "series", columns, results
    if config.kind == "omega-sweep":
        sweep = omega_sweep(config.experiment(), config.sweep_ratios(), workers=config.workers)
        return "sweep", sweep, {"argmax_variance": sweep.argmax_variance}
    sweep = length_sweep(
        config.experiment(),
        config.lengths,
        omega_absolute=config.omega_abs,
        n_mode_policy=config.n_mode_policy,
        band_width=config.band_width,
        workers=config.workers,
    )
    return "sweep", sweep, {"regimes": sweep.regimes}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


FLAG_KEYS = {
    "omega_ratio": "omega_ratio",
    "epsilon": "epsilon",
    "n_modes": "n_modes",
    "t_max": "t_max",
    "dt": "dt",
    "initial": "initial",
    "lengths": "lengths",
    "omega_abs": "omega_abs",
    "out": "out",
    "format": "format",
    "workers": "workers",
    "policy": "n_mode_policy",
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value config file")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--omega-ratio", metavar="X[,X...]", help="Omega / Omega_TC")
    common.add_argument("--epsilon", metavar="X", help="comb frequency perturbation")
    common.add_argument("--n-modes", metavar="K", help="N (even); N + 1 resonator modes")
    common.add_argument("--t-max", metavar="X", help="horizon in units of T_B")
    common.add_argument("--dt", metavar="X", help="sampling step in units of T_B")
    common.add_argument("--initial", choices=("special", "cavity2", "superposition"))
    common.add_argument("--lengths", metavar="L1,L2,...", help="lengths in units of lambda0")
    common.add_argument("--omega-abs", metavar="X", help="fixed Omega for length sweeps")
    common.add_argument("--policy", choices=("fixed-n", "fixed-band"), help="mode-count policy")
    common.add_argument("--workers", metavar="K", help="worker processes for sweeps")

    parser = _Parser(prog="adtc", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="kind", required=True)
    for name, text in (
        ("echo", "Loschmidt echo L(t)"),
        ("return", "return probability p(t), period and early decay rate"),
        ("omega-sweep", "time-averaged cavity-1 variance versus Omega / Omega_TC"),
        ("length-sweep", "echo and regime versus resonator length"),
    ):
        sub.add_parser(name, parents=[common], help=text)
    return parser


def resolve_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    overrides = {"kind": args.kind}
    for attr, key in FLAG_KEYS.items():
        value = getattr(args, attr)
        if value is not None:
            overrides[key] = value
    return parse_config(text, overrides)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = resolve_config(argv)
    except (ConfigError, ParameterError) as exc:
        print(f"adtc: config error: {exc}", file=sys.stderr)
        return 1

    started = time.perf_counter()
    try:
        payload_kind, payload, results = _run(config)
    except ConvergenceError as exc:
        print(f"adtc: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, ValueError) as exc:
        print(f"adtc: config error: {exc}", file=sys.stderr)
        return 1
    manifest = build_manifest(config, time.perf_counter() - started, results)

    out = config.out or None
    try:
        if payload_kind == "series":
            write_series(payload, out, config.format, manifest)
        else:
            write_sweep(payload, out, config.format, manifest)
    except OSError as exc:
        print(f"adtc: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0
