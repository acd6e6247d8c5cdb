"""Innovation-distribution catalog with exact cumulants and the Monte Carlo engine.

Families and their parameter tuples (all optionally standardized to mean 0):

    gaussian(sd)            gamma(shape, rate)       lognormal(mu, sigma)
    chisq(df)               uniform(low, high)       beta(a, b)
    laplace(scale)          triangular(half_width)   # symmetric, mode 0

Sixth-cumulant closed forms are implemented for the symmetric families
(gaussian, uniform, laplace, triangular); g3 is reported only for those.

The engine simulates ``n_sim`` data sets per specification, fits every
requested method, and reports MSE / bias / variance / coverage plus the
empirical efficiency gain MSE(method) / MSE(baseline) next to the
theoretical g2 or g3.  The "ml" method name is accepted as an alias for
"css" (exact-likelihood ARIMA is out of scope) with a warning.
"""

import csv
import math
import warnings as _warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import norm

from .cumulants import CumulantProfile, g2_coefficient, g3_coefficient
from .errors import FitFailureError
from .linmodel import asymptotic_covariance, build_design, fit_ols, fit_pmm2, fit_pmm3
from .tscore import (
    ModelOrder,
    TsParams,
    fit_css,
    param_names,
    simulate_arima,
    ts_asymptotic_covariance,
)
from .tspmm import fit_ar_pmm2, fit_ts_pmm2, fit_ts_pmm3

__all__ = [
    "InnovationSpec",
    "McSpec",
    "McSummary",
    "McSummaryRow",
    "GridResult",
    "innovation_theory",
    "innovation_mean",
    "sample_innovations",
    "run_monte_carlo",
    "advantage_grid",
]

_FAMILY_DEFAULTS = {
    "gaussian": (1.0,),
    "gamma": (2.0, 1.0),
    "lognormal": (0.0, 0.55),
    "chisq": (3.0,),
    "uniform": (-1.0, 1.0),
    "beta": (2.0, 5.0),
    "laplace": (1.0,),
    "triangular": (1.0,),
}


@dataclass(frozen=True)
class InnovationSpec:
    """I.i.d. innovation law; ``params`` may be a prefix of the family tuple."""

    family: str
    params: tuple = ()
    standardized: bool = True


def _resolve_params(spec: InnovationSpec) -> tuple:
    if spec.family not in _FAMILY_DEFAULTS:
        raise ValueError(f"unknown innovation family {spec.family!r}; "
                         f"choose from {sorted(_FAMILY_DEFAULTS)}")
    defaults = _FAMILY_DEFAULTS[spec.family]
    given = tuple(float(v) for v in spec.params)
    if len(given) > len(defaults):
        raise ValueError(f"{spec.family} takes at most {len(defaults)} parameters")
    params = given + defaults[len(given):]
    fam = spec.family
    if fam == "gaussian" and params[0] <= 0:
        raise ValueError("gaussian sd must be positive")
    if fam == "gamma" and (params[0] <= 0 or params[1] <= 0):
        raise ValueError("gamma shape and rate must be positive")
    if fam == "lognormal" and params[1] <= 0:
        raise ValueError("lognormal sigma must be positive")
    if fam == "chisq" and params[0] <= 0:
        raise ValueError("chisq df must be positive")
    if fam == "uniform" and params[0] >= params[1]:
        raise ValueError("uniform requires low < high")
    if fam == "beta" and (params[0] <= 0 or params[1] <= 0):
        raise ValueError("beta shape parameters must be positive")
    if fam == "laplace" and params[0] <= 0:
        raise ValueError("laplace scale must be positive")
    if fam == "triangular" and params[0] <= 0:
        raise ValueError("triangular half width must be positive")
    return params


def innovation_mean(spec: InnovationSpec) -> float:
    """Population mean of the unshifted law (the standardizing shift)."""
    p = _resolve_params(spec)
    fam = spec.family
    if fam == "gaussian":
        return 0.0
    if fam == "gamma":
        return p[0] / p[1]
    if fam == "lognormal":
        return math.exp(p[0] + p[1] ** 2 / 2.0)
    if fam == "chisq":
        return p[0]
    if fam == "uniform":
        return (p[0] + p[1]) / 2.0
    if fam == "beta":
        return p[0] / (p[0] + p[1])
    return 0.0  # laplace, triangular are centered already


def innovation_theory(spec: InnovationSpec) -> CumulantProfile:
    """Exact population cumulants and efficiency coefficients of the family."""
    p = _resolve_params(spec)
    fam = spec.family
    gamma6 = None
    if fam == "gaussian":
        gamma3, gamma4, gamma6 = 0.0, 0.0, 0.0
    elif fam == "gamma":
        k = p[0]
        gamma3, gamma4 = 2.0 / math.sqrt(k), 6.0 / k
    elif fam == "lognormal":
        w = math.exp(p[1] ** 2)
        gamma3 = (w + 2.0) * math.sqrt(w - 1.0)
        gamma4 = w**4 + 2.0 * w**3 + 3.0 * w**2 - 6.0
    elif fam == "chisq":
        k = p[0]
        gamma3, gamma4 = math.sqrt(8.0 / k), 12.0 / k
    elif fam == "uniform":
        gamma3, gamma4, gamma6 = 0.0, -1.2, 48.0 / 7.0
    elif fam == "beta":
        a, b = p
        gamma3 = 2.0 * (b - a) * math.sqrt(a + b + 1.0) / ((a + b + 2.0) * math.sqrt(a * b))
        gamma4 = 6.0 * ((a - b) ** 2 * (a + b + 1.0) - a * b * (a + b + 2.0)) \
            / (a * b * (a + b + 2.0) * (a + b + 3.0))
    elif fam == "laplace":
        gamma3, gamma4, gamma6 = 0.0, 3.0, 30.0
    else:  # triangular
        gamma3, gamma4, gamma6 = 0.0, -0.6, 12.0 / 7.0
    g2 = g2_coefficient(gamma3, gamma4)
    g3 = g3_coefficient(gamma4, gamma6) if gamma6 is not None else None
    return CumulantProfile(gamma3, gamma4, gamma6, g2, g3)


def sample_innovations(spec: InnovationSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n i.i.d. innovations, shifted to mean zero when standardized."""
    p = _resolve_params(spec)
    fam = spec.family
    if fam == "gaussian":
        x = rng.normal(0.0, p[0], n)
    elif fam == "gamma":
        x = rng.gamma(p[0], 1.0 / p[1], n)
    elif fam == "lognormal":
        x = rng.lognormal(p[0], p[1], n)
    elif fam == "chisq":
        x = rng.chisquare(p[0], n)
    elif fam == "uniform":
        x = rng.uniform(p[0], p[1], n)
    elif fam == "beta":
        x = rng.beta(p[0], p[1], n)
    elif fam == "laplace":
        x = rng.laplace(0.0, p[0], n)
    else:  # triangular
        x = rng.triangular(-p[0], 0.0, p[0], n)
    if spec.standardized:
        x = x - innovation_mean(spec)
    return x


# ---------------------------------------------------------------------------
# Monte Carlo comparison engine
# ---------------------------------------------------------------------------

_TS_MODELS = ("ar", "ma", "arma", "arima")


@dataclass(frozen=True)
class McSpec:
    """One simulation scenario: model class, true parameters, innovation law."""

    model: str  # "ar" | "ma" | "arma" | "arima" | "regression"
    theta: tuple
    innovations: InnovationSpec
    n: int
    label: str = ""
    order: ModelOrder | None = None
    burnin: int = 100

    def __post_init__(self):
        if self.model not in _TS_MODELS + ("regression",):
            raise ValueError(f"unknown model {self.model!r}")
        object.__setattr__(self, "theta", tuple(float(v) for v in self.theta))
        if not self.label:
            object.__setattr__(self, "label", f"{self.model}_{self.innovations.family}")
        if self.model in _TS_MODELS:
            if self.order is None:
                raise ValueError("time-series specs require an explicit ModelOrder")
            if len(self.theta) != self.order.n_params:
                raise ValueError(
                    f"theta has {len(self.theta)} entries but the order needs "
                    f"{self.order.n_params}")
        elif len(self.theta) < 1:
            raise ValueError("regression theta needs at least an intercept")


@dataclass(frozen=True)
class McSummaryRow:
    label: str
    method: str
    parameter: str
    n_used: int
    mse: float
    bias: float
    variance: float
    coverage: float
    gain: float | None
    theory_g: float | None


@dataclass
class McSummary:
    rows: list[McSummaryRow]
    n_sim: int
    n_failed: dict[str, int]

    def get(self, label: str, method: str, parameter: str) -> McSummaryRow:
        for row in self.rows:
            if (row.label, row.method, row.parameter) == (label, method, parameter):
                return row
        raise KeyError((label, method, parameter))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["label", "method", "parameter", "n_used", "mse",
                             "bias", "variance", "coverage", "gain", "theory_g"])
            for r in self.rows:
                writer.writerow([
                    r.label, r.method, r.parameter, r.n_used, repr(r.mse),
                    repr(r.bias), repr(r.variance), repr(r.coverage),
                    "" if r.gain is None else repr(r.gain),
                    "" if r.theory_g is None else repr(r.theory_g)])


def _normalize_methods(methods, is_ts: bool) -> list[str]:
    out = []
    for m in methods:
        m = m.lower()
        if m == "ml":
            _warnings.warn("method 'ml' maps to CSS (exact-likelihood ARIMA is "
                           "not implemented)", UserWarning, stacklevel=3)
            m = "css"
        if is_ts and m == "ols":
            raise ValueError("use 'css' as the baseline for time-series specs")
        if not is_ts and m == "css":
            raise ValueError("use 'ols' as the baseline for regression specs")
        if m not in ("ols", "css", "pmm2", "pmm3"):
            raise ValueError(f"unknown method {m!r}")
        if m not in out:
            out.append(m)
    if not out:
        raise ValueError("no methods requested")
    return out


def _spec_param_names(spec: McSpec) -> list[str]:
    if spec.model == "regression":
        return ["intercept"] + [f"x{j}" for j in range(1, len(spec.theta))]
    return param_names(spec.order)


def _simulate_spec(spec: McSpec, rng: np.random.Generator):
    if spec.model == "regression":
        eps = sample_innovations(spec.innovations, spec.n, rng)
        k = len(spec.theta)
        cols = [rng.standard_normal(spec.n) for _ in range(k - 1)]
        X = np.column_stack([np.ones(spec.n)] + cols)
        y = X @ np.asarray(spec.theta) + eps
        return build_design(y, cols, include_intercept=True)
    eps = sample_innovations(spec.innovations, spec.n + spec.burnin, rng)
    params = TsParams.from_vector(np.asarray(spec.theta), spec.order)
    return simulate_arima(spec.order, params, eps, spec.burnin)


def _fit_method(spec: McSpec, method: str, data, z: float):
    """Fit one method; return (estimates, covered-indicator vector)."""
    theta = np.asarray(spec.theta)
    if spec.model == "regression":
        fit = {"ols": fit_ols, "pmm2": fit_pmm2, "pmm3": fit_pmm3}[method](data)
        if not fit.converged:
            raise FitFailureError("fit did not converge")
        est = fit.coefficients
        cov = asymptotic_covariance(fit, data)
    else:
        order = spec.order
        if method == "css":
            fit = fit_css(data, order)
        elif method == "pmm2":
            if spec.model == "ar" and order.d + order.D == 0:
                fit = fit_ar_pmm2(data, order.p, include_mean=order.include_mean)
            else:
                fit = fit_ts_pmm2(data, order)
        else:
            fit = fit_ts_pmm3(data, order)
        if not fit.converged:
            raise FitFailureError("fit did not converge")
        est = fit.params.to_vector(order)
        cov = ts_asymptotic_covariance(fit)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    covered = np.abs(est - theta) <= z * se
    return est, covered


def _run_replicate(spec: McSpec, methods, level: float, seed_seq):
    """One replicate: simulate once, fit all methods.  None signals failure."""
    rng = np.random.default_rng(seed_seq)
    z = norm.ppf(0.5 + level / 2.0)
    try:
        data = _simulate_spec(spec, rng)
        out = {}
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore")
            for method in methods:
                out[method] = _fit_method(spec, method, data, z)
        return out
    except Exception:
        return None


def _replicate_chunk(args):
    spec, methods, level, indexed_seeds = args
    return [(idx, _run_replicate(spec, methods, level, ss))
            for idx, ss in indexed_seeds]


def run_monte_carlo(specs, methods, n_sim: int, seed: int = 0,
                    level: float = 0.95, n_jobs: int = 1):
    """Simulate and fit every spec x method; return (results, McSummary).

    ``results`` maps (label, method) to an (n_sim, k) estimate matrix with
    NaN rows for dropped replicates.  A replicate is dropped for all methods
    when any requested method fails on it, keeping the MSE comparisons
    matched; a spec errors out when more than 10% of replicates drop.
    """
    specs = list(specs)
    if n_sim < 50:
        raise ValueError(f"n_sim must be >= 50, got {n_sim}")
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise ValueError("spec labels must be unique")
    root = np.random.SeedSequence(seed)
    spec_streams = root.spawn(len(specs))
    results: dict[tuple[str, str], np.ndarray] = {}
    rows: list[McSummaryRow] = []
    n_failed: dict[str, int] = {}
    for si, spec in enumerate(specs):
        is_ts = spec.model in _TS_MODELS
        spec_methods = _normalize_methods(methods, is_ts)
        rep_seeds = spec_streams[si].spawn(n_sim)
        indexed = list(enumerate(rep_seeds))
        if n_jobs > 1:
            chunk_size = max(1, math.ceil(n_sim / (n_jobs * 4)))
            chunks = [(spec, spec_methods, level, indexed[i:i + chunk_size])
                      for i in range(0, n_sim, chunk_size)]
            payloads: list = [None] * n_sim
            with ProcessPoolExecutor(max_workers=n_jobs) as pool:
                for part in pool.map(_replicate_chunk, chunks):
                    for idx, payload in part:
                        payloads[idx] = payload
        else:
            payloads = [_run_replicate(spec, spec_methods, level, ss)
                        for _, ss in indexed]
        names = _spec_param_names(spec)
        k = len(names)
        est = {m: np.full((n_sim, k), np.nan) for m in spec_methods}
        cov = {m: np.full((n_sim, k), np.nan) for m in spec_methods}
        failed = 0
        for idx, payload in enumerate(payloads):
            if payload is None:
                failed += 1
                continue
            for m in spec_methods:
                est[m][idx] = payload[m][0]
                cov[m][idx] = payload[m][1]
        if failed > 0.1 * n_sim:
            raise FitFailureError(
                f"spec {spec.label!r}: {failed}/{n_sim} replicates failed")
        n_failed[spec.label] = failed
        keep = ~np.isnan(est[spec_methods[0]][:, 0])
        theta = np.asarray(spec.theta)
        baseline = "css" if is_ts else "ols"
        profile = innovation_theory(spec.innovations)
        mses = {}
        for m in spec_methods:
            e = est[m][keep]
            mses[m] = np.mean((e - theta) ** 2, axis=0)
            results[(spec.label, m)] = est[m]
        for m in spec_methods:
            e = est[m][keep]
            bias = e.mean(axis=0) - theta
            variance = e.var(axis=0)
            coverage = cov[m][keep].mean(axis=0)
            if baseline in mses:
                gain = mses[m] / mses[baseline]
            else:
                gain = [None] * k
            theory = {"pmm2": profile.g2, "pmm3": profile.g3,
                      baseline: 1.0}.get(m)
            for j, name in enumerate(names):
                rows.append(McSummaryRow(
                    label=spec.label, method=m, parameter=name,
                    n_used=int(keep.sum()), mse=float(mses[m][j]),
                    bias=float(bias[j]), variance=float(variance[j]),
                    coverage=float(coverage[j]),
                    gain=None if gain[j] is None else float(gain[j]),
                    theory_g=theory))
    return results, McSummary(rows=rows, n_sim=n_sim, n_failed=n_failed)


# ---------------------------------------------------------------------------
# Advantage grid
# ---------------------------------------------------------------------------

def skew_innovations(gamma3: float) -> InnovationSpec:
    """Standardized family with exact skewness gamma3: gamma(4/gamma3^2) or gaussian."""
    if gamma3 < 0.0:
        raise ValueError("grid skewness values must be non-negative")
    if gamma3 == 0.0:
        return InnovationSpec("gaussian")
    return InnovationSpec("gamma", (4.0 / gamma3**2, 1.0))


@dataclass
class GridResult:
    gamma3: list[float]
    n: list[int]
    values: np.ndarray  # shape (len(gamma3), len(n)); MSE(PMM2)/MSE(baseline)

    @property
    def rows(self) -> list[tuple[float, int, float]]:
        return [(g, n, float(self.values[i, j]))
                for i, g in enumerate(self.gamma3)
                for j, n in enumerate(self.n)]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["gamma3", "n", "g2_hat"])
            for g, n, v in self.rows:
                writer.writerow([repr(float(g)), n, repr(v)])


def advantage_grid(gamma3_grid, n_grid, B: int, model: McSpec | None = None,
                   seed: int = 0, n_jobs: int = 1) -> GridResult:
    """Empirical MSE(PMM2)/MSE(baseline) of the leading parameter per (gamma3, N) cell."""
    gamma3_grid = [float(g) for g in gamma3_grid]
    n_grid = [int(n) for n in n_grid]
    if not gamma3_grid or not n_grid:
        raise ValueError("empty grid")
    if model is None:
        model = McSpec(model="arima", theta=(0.7,), label="grid",
                       innovations=InnovationSpec("gaussian"), n=200,
                       order=ModelOrder(p=1, d=1, q=0))
    names = _spec_param_names(model)
    leading = names[1] if model.model == "regression" and len(names) > 1 else names[0]
    baseline = "ols" if model.model == "regression" else "css"
    specs = [replace(model, innovations=skew_innovations(g), n=n,
                     label=f"gamma{g:g}_n{n}")
             for g in gamma3_grid for n in n_grid]
    _, summary = run_monte_carlo(specs, (baseline, "pmm2"), B, seed=seed,
                                 n_jobs=n_jobs)
    values = np.empty((len(gamma3_grid), len(n_grid)))
    for i, g in enumerate(gamma3_grid):
        for j, n in enumerate(n_grid):
            row = summary.get(f"gamma{g:g}_n{n}", "pmm2", leading)
            values[i, j] = row.gain
    return GridResult(gamma3=gamma3_grid, n=n_grid, values=values)
