"""Command-line front end and experiment runner.

Subcommands
-----------
fit
    Run one experiment from a YAML config (flags override config keys).
eco-surface
    Write the herbivore equilibrium surface as an ``x,y,f`` CSV.
compare
    Error table of several methods over functions, sizes and seeds.
"""

import argparse
import csv
import json
import logging
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import yaml

from .baselines import global_candidates, global_constrained_fit, shepard_eval
from .eco_demo import EcoParams, equilibrium_surface
from .exceptions import ConfigurationError, IngestionError, PCPUError
from .geometry import Domain, check_in_domain
from .metrics import error_report, eval_grid, random_nodes, test_function
from .pu import Mode, PUConfig, default_kernel, evaluate, fit

logger = logging.getLogger(__name__)

__all__ = ["load_csv", "write_grid_csv", "write_report", "load_config", "run_experiment", "run_compare", "main"]

METHODS = ("pu", "pcpu", "shepard", "global")

DEFAULTS = {
    "methods": ["pcpu"],
    "function": None,
    "data": None,
    "N": 300,
    "seed": 1,
    "kernel": "wendland",
    "eps": None,
    "d_override": None,
    "grid": 80,
    "domain": None,
    "output": "results",
    "shepard_power": 2.0,
    "global_candidates": None,
}


class StageError(PCPUError):
    """A pipeline failure tagged with the stage it happened in."""

    def __init__(self, stage, error):
        super().__init__(f"{stage}: {error}")
        self.stage = stage
        self.error = error


# ---------------------------------------------------------------- file io


def load_csv(path, domain=None):
    """Read an ``x,y,f`` CSV with one header line.

    Returns
    -------
    points : ndarray, shape (n, 2)
    values : ndarray, shape (n,)

    Raises
    ------
    IngestionError
        On a bad header, a malformed or non-finite row (the message names the
        1-based line), or, when ``domain`` is given, a point outside it.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["x", "y", "f"]:
            raise IngestionError(f"{path}: line 1: expected header 'x,y,f', got {header!r}", row=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise IngestionError(f"{path}: line {lineno}: expected 3 fields, got {len(row)}", row=lineno)
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise IngestionError(f"{path}: line {lineno}: cannot parse {','.join(row)!r}", row=lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise IngestionError(f"{path}: line {lineno}: non-finite value", row=lineno)
            rows.append(vals)
    data = np.array(rows, dtype=float).reshape(-1, 3)
    if domain is not None:
        try:
            check_in_domain(data[:, :2], Domain.coerce(domain))
        except IngestionError as exc:
            raise IngestionError(f"{path}: line {exc.row + 2}: {exc}", row=exc.row + 2) from None
    return data[:, :2].copy(), data[:, 2].copy()


def write_grid_csv(path, points, values):
    """Write ``x,y,f`` rows with 17 significant digits (exact round trip)."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    values = np.asarray(values, dtype=float).reshape(-1)
    if len(points) != len(values):
        raise ValueError("points and values differ in length")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write("x,y,f\n")
        for (x, y), f in zip(points, values):
            fh.write(f"{x:.17g},{y:.17g},{f:.17g}\n")


def write_report(path, report):
    """Write ``report`` as sorted, indented JSON.

    Floats are written in shortest round-trip form, so a report is
    byte-identical whenever the numbers are.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


# ---------------------------------------------------------------- config


def load_config(path):
    """Read a flat YAML mapping of experiment keys."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    with open(path) as fh:
        try:
            cfg = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"{path}: invalid YAML: {exc}") from None
    if cfg is None:
        cfg = {}
    if not isinstance(cfg, dict):
        raise ConfigurationError(f"{path}: expected a mapping of keys, got {type(cfg).__name__}")
    return cfg


def validate_config(cfg):
    """Merge ``cfg`` over the defaults and check every key."""
    cfg = dict(cfg)
    if "method" in cfg:
        cfg.setdefault("methods", cfg.pop("method"))
    unknown = sorted(set(cfg) - set(DEFAULTS))
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
    out = {**DEFAULTS, **{k: v for k, v in cfg.items() if v is not None}}
    methods = out["methods"]
    if isinstance(methods, str):
        methods = [m.strip() for m in methods.split(",") if m.strip()]
    methods = [str(m).lower() for m in methods]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise ConfigurationError(f"unknown method(s) {bad or methods}; choose from {', '.join(METHODS)}")
    out["methods"] = list(dict.fromkeys(methods))
    if out["data"] is None and out["function"] is None:
        raise ConfigurationError("give either 'function' (synthetic data) or 'data' (CSV path)")
    if out["function"] is not None:
        out["function"] = str(out["function"]).lower()
        if out["function"] not in ("f1", "f2"):
            raise ConfigurationError(f"unknown function {out['function']!r}; choose f1 or f2")
    for key in ("N", "seed", "grid"):
        try:
            out[key] = int(out[key])
        except (TypeError, ValueError):
            raise ConfigurationError(f"{key} must be an integer, got {out[key]!r}") from None
    if out["N"] < 1:
        raise ConfigurationError("N must be positive")
    if out["grid"] < 2:
        raise ConfigurationError("grid must be at least 2")
    try:
        default_kernel(out["kernel"], None if out["eps"] is None else float(out["eps"]))
    except ValueError as exc:
        raise ConfigurationError(f"bad kernel settings: {exc}") from None
    if out["eps"] is not None:
        out["eps"] = float(out["eps"])
    if out["d_override"] is not None:
        out["d_override"] = int(out["d_override"])
    if out["domain"] is not None:
        dom = out["domain"]
        try:
            out["domain"] = [float(v) for v in dom]
            Domain.coerce(out["domain"])
        except (TypeError, ValueError):
            raise ConfigurationError(f"domain must be [xmin, xmax, ymin, ymax], got {dom!r}") from None
    out["kernel"] = default_kernel(out["kernel"]).family.value
    out["output"] = str(out["output"])
    return out


# ---------------------------------------------------------------- runner


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (PCPUError, ValueError, ArithmeticError, OSError, np.linalg.LinAlgError) as exc:
        raise StageError(name, exc) from exc


def _obtain_data(cfg, domain):
    if cfg["data"] is not None:
        return load_csv(cfg["data"], domain)
    pts = random_nodes(cfg["N"], cfg["seed"])
    # random_nodes draws in the unit square; map it onto the domain
    pts = np.column_stack([
        domain.xmin + pts[:, 0] * domain.width,
        domain.ymin + pts[:, 1] * domain.height,
    ])
    return pts, test_function(cfg["function"], pts[:, 0], pts[:, 1])


def _run_method(method, cfg, points, values, grid, domain):
    kernel = default_kernel(cfg["kernel"], cfg["eps"])
    if method == "shepard":
        return shepard_eval(points, values, grid, cfg["shepard_power"]), None
    if method == "global":
        cands = cfg["global_candidates"] or global_candidates(len(points))
        model = global_constrained_fit(points, values, kernel, domain, grid, cands)
    else:
        config = PUConfig(kernel, Mode(method), domain, d_override=cfg["d_override"])
        model = fit(points, values, config, eval_points=grid if method == "pcpu" else None)
    return evaluate(model, grid), [int(k) for k in model.n_added]


def execute(cfg):
    """Run a validated config; returns ``(report, grids)`` without writing."""
    domain = Domain.coerce(cfg["domain"])
    points, values = _stage("ingest", _obtain_data, cfg, domain)
    grid = eval_grid(cfg["grid"], domain)
    truth = None
    if cfg["function"] is not None:
        truth = test_function(cfg["function"], grid[:, 0], grid[:, 1])
    results, timing, grids = {}, {}, {}
    for method in cfg["methods"]:
        t0 = time.perf_counter()
        approx, n_added = _stage(f"fit[{method}]", _run_method, method, cfg, points, values, grid, domain)
        timing[method] = time.perf_counter() - t0
        if truth is not None:
            entry = error_report(truth, approx).as_dict()
        else:
            entry = {
                "mae": None,
                "rmse": None,
                "n_eval": int(len(approx)),
                "min_value": float(approx.min()),
                "n_negative": int(np.count_nonzero(approx < -1e-10)),
            }
        entry["n_added"] = n_added
        results[method] = entry
        grids[method] = approx
    report = {
        "config": {k: cfg[k] for k in sorted(cfg) if k != "output"},
        "n_data": int(len(points)),
        "results": results,
        "timing": {"seconds": timing},
    }
    return report, grid, grids


def run_experiment(config_path, overrides=None):
    """Run the experiment described by a YAML config.

    Writes ``report.json`` and one ``grid_<method>.csv`` per method into the
    configured output directory. ``overrides`` (e.g. parsed flags) win over
    config keys, which win over the defaults.

    Returns
    -------
    dict
        The report.
    """
    raw = _stage("config", load_config, config_path) if config_path is not None else {}
    merged = {**raw, **{k: v for k, v in (overrides or {}).items() if v is not None}}
    cfg = _stage("config", validate_config, merged)
    report, grid, grids = execute(cfg)
    out = Path(cfg["output"])
    for method, approx in grids.items():
        _stage("write", write_grid_csv, out / f"grid_{method}.csv", grid, approx)
    _stage("write", write_report, out / "report.json", report)
    return report


def run_compare(functions, sizes, seeds, methods, kernel, eps=None, grid=80):
    """Error table rows ``(function, N, seed, method, rmse, mae, min_value, n_negative)``."""
    rows = []
    for fn in functions:
        for n in sizes:
            for seed in seeds:
                cfg = validate_config({
                    "function": fn, "N": n, "seed": seed, "methods": methods,
                    "kernel": kernel, "eps": eps, "grid": grid,
                })
                report, _, _ = execute(cfg)
                for method in cfg["methods"]:
                    r = report["results"][method]
                    rows.append((fn, n, seed, method, r["rmse"], r["mae"], r["min_value"], r["n_negative"]))
    return rows


# ---------------------------------------------------------------- entry point


def _floats(text):
    return [float(v) for v in text.split(",")]


def _ints(text):
    return [int(v) for v in text.split(",")]


def build_parser():
    parser = argparse.ArgumentParser(prog="pcpu", description="Positivity-preserving RBF partition-of-unity interpolation.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="run one experiment from a YAML config")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--method", dest="methods", help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--function", choices=["f1", "f2"])
    p.add_argument("--data", help="x,y,f CSV to interpolate instead of a test function")
    p.add_argument("--N", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--kernel", choices=["wendland", "imq"])
    p.add_argument("--eps", type=float)
    p.add_argument("--d-override", dest="d_override", type=int)
    p.add_argument("--grid", type=int, help="evaluation grid side")
    p.add_argument("--output", help="output directory")

    p = sub.add_parser("eco-surface", help="herbivore equilibrium surface as x,y,f CSV")
    p.add_argument("--config", help="YAML config with the same keys as the flags")
    p.add_argument("--a", type=float, help="grass feeding rate (required)")
    p.add_argument("--b", type=float, help="tree feeding rate (required)")
    p.add_argument("--alpha-range", dest="alpha_range", type=_floats, help="min,max")
    p.add_argument("--mu-range", dest="mu_range", type=_floats, help="min,max")
    p.add_argument("--n-side", dest="n_side", type=int)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--output", help="CSV path")

    p = sub.add_parser("compare", help="error table over functions, sizes and seeds")
    p.add_argument("--functions", default="f1,f2")
    p.add_argument("--N", dest="sizes", type=_ints, default=[300, 1000])
    p.add_argument("--seeds", type=_ints, default=[1, 2, 3, 4, 5])
    p.add_argument("--methods", default="pu,pcpu,shepard")
    p.add_argument("--kernel", choices=["wendland", "imq"], default="imq")
    p.add_argument("--eps", type=float)
    p.add_argument("--grid", type=int, default=80)
    p.add_argument("--output", help="also write the table as CSV")
    return parser


ECO_DEFAULTS = {
    "a": None,
    "b": None,
    "alpha_range": [5.0, 40.0],
    "mu_range": [0.01, 0.05],
    "n_side": 20,
    "t_end": 20000.0,
    "dt": 1.0,
    "output": "eco_surface.csv",
}


def _eco(args):
    raw = _stage("config", load_config, args.config) if args.config else {}
    unknown = sorted(set(raw) - set(ECO_DEFAULTS))
    if unknown:
        raise StageError("config", ConfigurationError(f"unknown config keys: {', '.join(unknown)}"))
    flags = {k: getattr(args, k) for k in ECO_DEFAULTS}
    cfg = {**ECO_DEFAULTS, **{k: v for k, v in raw.items() if v is not None},
           **{k: v for k, v in flags.items() if v is not None}}
    if cfg["a"] is None or cfg["b"] is None:
        raise StageError("config", ConfigurationError("feeding rates a and b have no default; pass --a and --b"))
    params = _stage("config", EcoParams, a=float(cfg["a"]), b=float(cfg["b"]))
    # the stationarity warning is already logged
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        pts, vals, _ = _stage(
            "integrate", equilibrium_surface, params, cfg["alpha_range"], cfg["mu_range"],
            cfg["n_side"], cfg["t_end"], cfg["dt"],
        )
    _stage("write", write_grid_csv, cfg["output"], pts, vals)
    print(f"wrote {len(vals)} rows to {cfg['output']}")


def _compare(args):
    functions = [f.strip() for f in args.functions.split(",") if f.strip()]
    rows = _stage("compare", run_compare, functions, args.sizes, args.seeds, args.methods, args.kernel, args.eps, args.grid)
    header = ("function", "N", "seed", "method", "rmse", "mae", "min_value", "n_negative")
    print("{:<8} {:>5} {:>4} {:<8} {:>10} {:>10} {:>11} {:>5}".format(*header))
    for fn, n, seed, method, rmse, mae, vmin, nneg in rows:
        print(f"{fn:<8} {n:>5} {seed:>4} {method:<8} {rmse:>10.3e} {mae:>10.3e} {vmin:>11.3e} {nneg:>5}")
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        with open(args.output, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "fit":
            overrides = {k: getattr(args, k) for k in DEFAULTS if hasattr(args, k)}
            report = run_experiment(args.config, overrides)
            for method, r in report["results"].items():
                rmse = "n/a" if r["rmse"] is None else f"{r['rmse']:.3e}"
                print(f"{method}: rmse={rmse} min={r['min_value']:.3e} n_negative={r['n_negative']}")
        elif args.command == "eco-surface":
            _eco(args)
        else:
            _compare(args)
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc.error}", file=sys.stderr)
        return 2 if exc.stage == "config" else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
