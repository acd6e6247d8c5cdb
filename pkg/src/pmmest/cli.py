"""Command-line front end: fit, dispatch, bootstrap, simulate, mc, grid.

Exit codes: 0 success, 2 malformed arguments, 3 data errors (non-numeric,
missing values, too-short series), 4 fit failures.  Reports are JSON
(schema in docs/report_schema.json, version echoed in every report); tables
and series are CSV with a header row.  All commands are deterministic under
a fixed --seed.
"""

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .dispatch import DispatchConfig, dispatch_fit, render_decision, select_method
from .errors import DataError, InputTooShortError, PmmError
from .inference import block_bootstrap_ts, residual_bootstrap
from .linmodel import build_design, fit_ols, fit_pmm2, fit_pmm3, information_criteria
from .mcbench import InnovationSpec, McSpec, _FAMILY_DEFAULTS, advantage_grid, run_monte_carlo, sample_innovations
from .tscore import ModelOrder, TsFit, TsParams, fit_css, simulate_arima
from .tspmm import fit_ar_pmm2, fit_ts_pmm2, fit_ts_pmm3, forecast

SCHEMA_VERSION = "1"

_INNOVATION_KEYS = {
    "gaussian": ("sd",),
    "gamma": ("shape", "rate"),
    "lognormal": ("mu", "sigma"),
    "chisq": ("df",),
    "uniform": ("low", "high"),
    "beta": ("a", "b"),
    "laplace": ("scale",),
    "triangular": ("half_width",),
}


class UsageError(Exception):
    """Bad flag combination not caught by argparse itself (exit code 2)."""


# ---------------------------------------------------------------------------
# Flag value parsers (argparse type= callables; errors exit with code 2)
# ---------------------------------------------------------------------------

def _order_triple(text: str) -> tuple[int, int, int]:
    try:
        parts = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected p,d,q integers, got {text!r}")
    if len(parts) != 3 or any(v < 0 for v in parts):
        raise argparse.ArgumentTypeError(f"expected three non-negative integers, got {text!r}")
    return tuple(parts)


def _seasonal_quad(text: str) -> tuple[int, int, int, int]:
    try:
        parts = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected P,D,Q,s integers, got {text!r}")
    if len(parts) != 4 or any(v < 0 for v in parts):
        raise argparse.ArgumentTypeError(f"expected four non-negative integers, got {text!r}")
    return tuple(parts)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _name_list(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _innovations(text: str) -> InnovationSpec:
    fam, _, rest = text.partition(":")
    fam = fam.strip().lower()
    if fam not in _INNOVATION_KEYS:
        raise argparse.ArgumentTypeError(
            f"unknown family {fam!r}; choose from {sorted(_INNOVATION_KEYS)}")
    keys = _INNOVATION_KEYS[fam]
    if not rest:
        return InnovationSpec(fam)
    entries = [e.strip() for e in rest.split(",") if e.strip()]
    try:
        if all("=" in e for e in entries):
            given = dict(e.split("=", 1) for e in entries)
            unknown = set(given) - set(keys)
            if unknown:
                raise argparse.ArgumentTypeError(
                    f"unknown {fam} parameters {sorted(unknown)}; valid: {list(keys)}")
            defaults = _FAMILY_DEFAULTS[fam]
            params = tuple(float(given.get(k, defaults[i]))
                           for i, k in enumerate(keys))
        else:
            params = tuple(float(e) for e in entries)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad innovation parameters in {text!r}")
    if len(params) > len(keys):
        raise argparse.ArgumentTypeError(f"{fam} takes at most {len(keys)} parameters")
    return InnovationSpec(fam, params)


def _seed_value(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


# ---------------------------------------------------------------------------
# CSV / JSON helpers
# ---------------------------------------------------------------------------

def read_csv_columns(path, columns) -> dict[str, np.ndarray]:
    """Read named columns from a headered CSV; missing/non-numeric values are
    reported with row and column coordinates (header is row 1)."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}")
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file")
        for col in columns:
            if col not in header:
                raise DataError(f"{path}: column {col!r} not in header {header}")
        idx = {c: header.index(c) for c in columns}
        data: dict[str, list[float]] = {c: [] for c in columns}
        for rownum, row in enumerate(reader, start=2):
            if not any(cell.strip() for cell in row):
                continue
            for c in columns:
                i = idx[c]
                cell = row[i].strip() if i < len(row) else ""
                if not cell:
                    raise DataError(f"{path}: row {rownum}, column {c!r}: missing value")
                try:
                    data[c].append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: row {rownum}, column {c!r}: non-numeric value {cell!r}")
    if not data[columns[0]]:
        raise DataError(f"{path}: no data rows")
    return {c: np.asarray(v, dtype=float) for c, v in data.items()}


def write_series_csv(path, values, name: str = "x"):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([name])
        for v in values:
            writer.writerow([repr(float(v))])


def _sanitize(obj):
    """Replace NaN/inf with null so reports stay strict JSON."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    return obj


def write_report(report: dict, output):
    text = json.dumps(_sanitize(report), indent=2, sort_keys=True)
    if output:
        Path(output).write_text(text + "\n")
    else:
        print(text)


def _moments_dict(mom):
    if mom is None:
        return None
    return {"n": mom.n, "mean": mom.mean, "m2": mom.m2, "m3": mom.m3,
            "m4": mom.m4, "m6": mom.m6, "gamma3": mom.gamma3,
            "gamma4": mom.gamma4, "gamma6": mom.gamma6,
            "degenerate": mom.degenerate}


def _order_dict(order: ModelOrder):
    return {"p": order.p, "d": order.d, "q": order.q, "P": order.P,
            "D": order.D, "Q": order.Q, "s": order.s,
            "include_mean": order.include_mean}


def _decision_dict(decision):
    return {"method": decision.method, "n": decision.n,
            "gamma3": decision.gamma3, "gamma4": decision.gamma4,
            "gamma6": decision.gamma6, "g2": decision.g2, "g3": decision.g3,
            "rationale": decision.rationale,
            "thresholds": {
                "skew_threshold": decision.thresholds.skew_threshold,
                "g2_ceiling": decision.thresholds.g2_ceiling,
                "symmetric_threshold": decision.thresholds.symmetric_threshold,
            }}


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _build_order(args) -> ModelOrder | None:
    if args.order is None and getattr(args, "seasonal", None) is None:
        return None
    p, d, q = args.order if args.order is not None else (0, 0, 0)
    P, D, Q, s = args.seasonal if getattr(args, "seasonal", None) else (0, 0, 0, 0)
    include_mean = False if getattr(args, "no_mean", False) else None
    return ModelOrder(p=p, d=d, q=q, P=P, D=D, Q=Q, s=s, include_mean=include_mean)


def _fit_report_core(fit, kind: str, names=None):
    if isinstance(fit, TsFit):
        names = fit.param_names
        coefs = fit.params.to_vector(fit.order)
        order = _order_dict(fit.order)
        n = fit.original_series.size
    else:
        names = names or [f"x{j + 1}" for j in range(fit.coefficients.size)]
        coefs = fit.coefficients
        order = None
        n = fit.residuals.size
    loglik, aic, bic = information_criteria(fit)
    return {
        "kind": kind,
        "method": fit.method,
        "n": int(n),
        "coefficients": dict(zip(names, [float(c) for c in coefs])),
        "g_coefficient": float(fit.g_coefficient),
        "residual_cumulants": _moments_dict(fit.moments),
        "information_criteria": {"loglik": loglik, "aic": aic, "bic": bic},
        "converged": bool(fit.converged),
        "warnings": list(fit.warnings),
        "order": order,
    }


def cmd_fit(args) -> int:
    kind = "regression" if args.design else "timeseries"
    method = args.method.lower()
    decision = None
    if kind == "regression":
        cols = read_csv_columns(args.input, [args.column, *args.design])
        problem = build_design(cols[args.column], [cols[c] for c in args.design],
                               include_intercept=True, column_names=list(args.design))
        if args.horizon:
            raise UsageError("--horizon applies to time-series fits only")
        if method == "auto":
            decision, fit = dispatch_fit(problem, "regression", _dispatch_config(args))
            print(render_decision(decision))
        elif method in ("ols", "css"):
            fit = fit_ols(problem)
        elif method == "pmm2":
            fit = fit_pmm2(problem)
        elif method == "pmm3":
            fit = fit_pmm3(problem)
        else:
            raise UsageError(f"unknown method {args.method!r}")
        report = _fit_report_core(fit, kind, names=list(problem.column_names))
    else:
        x = read_csv_columns(args.input, [args.column])[args.column]
        order = _build_order(args)
        if method == "auto":
            decision, fit = dispatch_fit(x, "timeseries", _dispatch_config(args), order=order)
            print(render_decision(decision))
        else:
            if order is None:
                order = ModelOrder(p=1)
            if method in ("css", "ols"):
                fit = fit_css(x, order)
            elif method == "pmm2":
                if order.q == 0 and order.P == 0 and order.Q == 0 \
                        and order.d + order.D == 0 and order.p >= 1:
                    fit = fit_ar_pmm2(x, order.p, include_mean=order.include_mean)
                else:
                    fit = fit_ts_pmm2(x, order)
            elif method == "pmm3":
                fit = fit_ts_pmm3(x, order)
            else:
                raise UsageError(f"unknown method {args.method!r}")
        report = _fit_report_core(fit, kind)
        if args.horizon:
            report["forecasts"] = [float(v) for v in forecast(fit, args.horizon)]
    report["schema_version"] = SCHEMA_VERSION
    report["command"] = "fit"
    report["seed"] = args.seed
    if decision is not None:
        report["dispatch"] = _decision_dict(decision)
    write_report(report, args.output)
    return 0


def _dispatch_config(args) -> DispatchConfig:
    return DispatchConfig(
        skew_threshold=getattr(args, "skew_threshold", 0.3),
        g2_ceiling=getattr(args, "g2_ceiling", 0.95),
        symmetric_threshold=getattr(args, "symmetric_threshold", 0.1))


def cmd_dispatch(args) -> int:
    residuals = read_csv_columns(args.input, [args.column])[args.column]
    decision = select_method(residuals, _dispatch_config(args))
    print(render_decision(decision))
    if args.output:
        write_report({"schema_version": SCHEMA_VERSION, "command": "dispatch",
                      "decision": _decision_dict(decision)}, args.output)
    return 0


def cmd_bootstrap(args) -> int:
    method = args.method.lower()
    if args.design:
        cols = read_csv_columns(args.input, [args.column, *args.design])
        problem = build_design(cols[args.column], [cols[c] for c in args.design],
                               include_intercept=True, column_names=list(args.design))
        fit_method = "OLS" if method in ("ols", "css") else method.upper()
        result = residual_bootstrap(problem, method=fit_method, B=args.B,
                                    level=args.level, seed=args.seed)
    elif args.order is not None or args.seasonal is not None:
        x = read_csv_columns(args.input, [args.column])[args.column]
        order = _build_order(args)
        fit_method = "CSS" if method in ("ols", "css") else method.upper()
        result = block_bootstrap_ts(x, order, method=fit_method, B=args.B,
                                    block_length=args.block_length,
                                    level=args.level, seed=args.seed)
    else:
        raise UsageError("bootstrap needs either --design (regression) or --order (time series)")
    rows = [{"parameter": name,
             "estimate": result.estimate[i], "std_error": result.std_error[i],
             "t_value": result.t_value[i], "p_value": result.p_value[i],
             "conf_low": result.conf_low[i], "conf_high": result.conf_high[i]}
            for i, name in enumerate(result.parameters)]
    report = {"schema_version": SCHEMA_VERSION, "command": "bootstrap",
              "scheme": result.scheme, "fit_method": result.fit_method,
              "B": result.B, "level": result.level, "seed": result.seed,
              "n_failed": result.n_failed, "block_length": result.block_length,
              "rows": rows}
    write_report(report, args.output)
    return 0


def cmd_simulate(args) -> int:
    order = _build_order(args) or ModelOrder()
    params = TsParams(
        np.asarray(args.ar or (), dtype=float),
        np.asarray(args.ma or (), dtype=float),
        np.asarray(args.sar or (), dtype=float),
        np.asarray(args.sma or (), dtype=float),
        args.mean)
    expected = (order.p, order.q, order.P, order.Q)
    got = (params.phi.size, params.theta.size, params.Phi.size, params.Theta.size)
    if expected != got:
        raise UsageError(f"coefficient counts {got} do not match --order/--seasonal {expected}")
    if args.innovations_file:
        eps = read_csv_columns(args.innovations_file, [args.column])[args.column]
    else:
        if args.n is None:
            raise UsageError("--n is required when innovations are generated")
        rng = np.random.default_rng(np.random.SeedSequence(args.seed))
        eps = sample_innovations(args.innovations, args.n + args.burnin, rng)
    x = simulate_arima(order, params, eps, burnin=args.burnin)
    write_series_csv(args.output, x)
    return 0


def cmd_mc(args) -> int:
    if args.model == "regression":
        spec = McSpec(model="regression", theta=args.theta, innovations=args.innovations,
                      n=args.n, label=args.label or "regression")
    else:
        order = _build_order(args)
        if order is None:
            raise UsageError("time-series mc runs need --order")
        spec = McSpec(model=args.model, theta=args.theta, innovations=args.innovations,
                      n=args.n, label=args.label or args.model, order=order,
                      burnin=args.burnin)
    _, summary = run_monte_carlo([spec], args.methods, args.n_sim,
                                 seed=args.seed, n_jobs=args.jobs)
    summary.to_csv(args.output)
    return 0


def cmd_grid(args) -> int:
    order = _build_order(args) or ModelOrder(p=1, d=1, q=0)
    template = McSpec(model=args.model, theta=args.theta, label="grid",
                      innovations=InnovationSpec("gaussian"), n=100,
                      order=order if args.model != "regression" else None,
                      burnin=args.burnin)
    result = advantage_grid(args.grid_gamma3, args.grid_n, args.B,
                            model=template, seed=args.seed, n_jobs=args.jobs)
    result.to_csv(args.output)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_common_io(sub, with_design=True):
    sub.add_argument("--input", required=True, help="input CSV path (header row required)")
    sub.add_argument("--column", required=True, help="response / series column name")
    if with_design:
        sub.add_argument("--design", type=_name_list, default=(),
                         help="comma-separated predictor columns (regression mode)")


def _add_order_flags(sub):
    sub.add_argument("--order", type=_order_triple, default=None, metavar="p,d,q",
                     help="nonseasonal order; fit defaults to 1,0,0 for explicit "
                          "time-series methods, while auto scans AR orders")
    sub.add_argument("--seasonal", type=_seasonal_quad, default=None, metavar="P,D,Q,s")
    sub.add_argument("--no-mean", action="store_true",
                     help="exclude the mean term even when d + D = 0")


def _add_dispatch_thresholds(sub):
    sub.add_argument("--skew-threshold", type=float, default=0.3)
    sub.add_argument("--g2-ceiling", type=float, default=0.95)
    sub.add_argument("--symmetric-threshold", type=float, default=0.1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmmest",
        description="PMM2/PMM3 estimation for non-Gaussian regression and ARIMA models")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p = subs.add_parser("fit", help="fit a model (CSV in, JSON report out)")
    _add_common_io(p)
    p.add_argument("--method", default="auto",
                   choices=["ols", "css", "pmm2", "pmm3", "auto"])
    _add_order_flags(p)
    _add_dispatch_thresholds(p)
    p.add_argument("--horizon", type=int, default=0, help="forecast horizon (time series)")
    p.add_argument("--output", default=None, help="JSON report path (default stdout)")
    p.add_argument("--seed", type=_seed_value, default=None)
    p.set_defaults(handler=cmd_fit)

    p = subs.add_parser("dispatch", help="print the method-selection transcript")
    _add_common_io(p, with_design=False)
    _add_dispatch_thresholds(p)
    p.add_argument("--output", default=None, help="optional JSON report path")
    p.set_defaults(handler=cmd_dispatch)

    p = subs.add_parser("bootstrap", help="bootstrap standard errors and intervals")
    _add_common_io(p)
    p.add_argument("--method", default="pmm2", choices=["ols", "css", "pmm2", "pmm3"])
    _add_order_flags(p)
    p.add_argument("--B", type=int, default=500)
    p.add_argument("--block-length", type=int, default=None)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=_seed_value, default=0)
    p.add_argument("--output", default=None)
    p.set_defaults(handler=cmd_bootstrap)

    p = subs.add_parser("simulate", help="simulate an ARIMA series to CSV")
    _add_order_flags(p)
    p.add_argument("--ar", type=_float_list, default=None, metavar="c1,c2,...")
    p.add_argument("--ma", type=_float_list, default=None, metavar="c1,c2,...")
    p.add_argument("--sar", type=_float_list, default=None, metavar="c1,...")
    p.add_argument("--sma", type=_float_list, default=None, metavar="c1,...")
    p.add_argument("--mean", type=float, default=0.0)
    p.add_argument("--innovations", type=_innovations,
                   default=InnovationSpec("gaussian"),
                   help="family[:k=v,...], e.g. gamma:shape=2,rate=1")
    p.add_argument("--innovations-file", default=None,
                   help="CSV of innovations (overrides --innovations)")
    p.add_argument("--column", default="x",
                   help="column to read from --innovations-file")
    p.add_argument("--n", type=int, default=None, help="series length to generate")
    p.add_argument("--burnin", type=int, default=0)
    p.add_argument("--seed", type=_seed_value, default=0)
    p.add_argument("--output", required=True, help="output CSV path")
    p.set_defaults(handler=cmd_simulate)

    p = subs.add_parser("mc", help="Monte Carlo method comparison to CSV")
    p.add_argument("--model", default="arima",
                   choices=["regression", "ar", "ma", "arma", "arima"])
    _add_order_flags(p)
    p.add_argument("--theta", type=_float_list, required=True,
                   help="true parameter vector (matching the fitted one)")
    p.add_argument("--innovations", type=_innovations, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--n-sim", type=int, required=True)
    p.add_argument("--methods", type=_name_list, default=("css", "pmm2"))
    p.add_argument("--burnin", type=int, default=100)
    p.add_argument("--label", default=None)
    p.add_argument("--seed", type=_seed_value, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", required=True)
    p.set_defaults(handler=cmd_mc)

    p = subs.add_parser("grid", help="PMM2 advantage grid to long-format CSV")
    p.add_argument("--grid-gamma3", type=_float_list, required=True)
    p.add_argument("--grid-n", type=_int_list, required=True)
    p.add_argument("--B", type=int, required=True, help="replications per cell")
    p.add_argument("--model", default="arima",
                   choices=["regression", "ar", "ma", "arma", "arima"])
    _add_order_flags(p)
    p.add_argument("--theta", type=_float_list, default=(0.7,))
    p.add_argument("--burnin", type=int, default=100)
    p.add_argument("--seed", type=_seed_value, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", required=True)
    p.set_defaults(handler=cmd_grid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, InputTooShortError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except PmmError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
