"""Bootstrap standard errors and percentile intervals.

Residual resampling for regression; Carlstein non-overlapping block
resampling for time series.  Every replicate draws from its own RNG
substream derived from (seed, replicate index), so results are identical
regardless of execution order.
"""

import math
import warnings as _warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter
from scipy.stats import norm

from .errors import FitFailureError
from .linmodel import DesignProblem, fit_ols, fit_pmm2, fit_pmm3
from .tscore import (
    ModelOrder,
    expand_polynomial,
    fit_css,
    integrate_forecast,
    ma_expand_polynomial,
    param_names,
)
from .tspmm import fit_ar_pmm2, fit_ts_pmm2, fit_ts_pmm3

__all__ = [
    "BootstrapResult",
    "residual_bootstrap",
    "block_bootstrap_ts",
    "default_block_length",
]

_REGRESSION_FITTERS = {"OLS": fit_ols, "PMM2": fit_pmm2, "PMM3": fit_pmm3}


@dataclass
class BootstrapResult:
    """Per-parameter bootstrap table plus bookkeeping.

    ``t_value`` and ``p_value`` use the normal reference; confidence bounds
    are plain percentiles (which can occasionally exclude the point
    estimate - no correction is applied).
    """

    parameters: list[str]
    estimate: np.ndarray
    std_error: np.ndarray
    t_value: np.ndarray
    p_value: np.ndarray
    conf_low: np.ndarray
    conf_high: np.ndarray
    B: int
    scheme: str  # "residual" | "block"
    fit_method: str
    level: float
    seed: int
    n_failed: int
    block_length: int | None = None
    replicates: np.ndarray | None = None


def _summarize(names, estimate, reps, B, scheme, fit_method, level, seed,
               n_failed, block_length, keep_replicates) -> BootstrapResult:
    reps = np.asarray(reps, dtype=float)
    se = reps.std(axis=0, ddof=1)
    alpha = (1.0 - level) / 2.0
    lo = np.quantile(reps, alpha, axis=0)
    hi = np.quantile(reps, 1.0 - alpha, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0.0, estimate / se, math.nan)
    p = np.where(np.isnan(t), math.nan, 2.0 * norm.sf(np.abs(t)))
    return BootstrapResult(
        parameters=list(names), estimate=np.asarray(estimate, dtype=float),
        std_error=se, t_value=t, p_value=p, conf_low=lo, conf_high=hi,
        B=B, scheme=scheme, fit_method=fit_method, level=level, seed=seed,
        n_failed=n_failed, block_length=block_length,
        replicates=reps if keep_replicates else None)


def _check_b(B: int):
    if B < 1:
        raise ValueError("B must be positive")
    if B < 50:
        _warnings.warn(f"B = {B} < 50 gives unstable percentile intervals",
                       UserWarning, stacklevel=3)


def residual_bootstrap(problem: DesignProblem, method: str = "PMM2", B: int = 500,
                       level: float = 0.95, seed: int = 0,
                       keep_replicates: bool = False) -> BootstrapResult:
    """Residual-resampling bootstrap for a regression fit.

    Centered residuals are resampled with replacement, y* = X b + e* is
    rebuilt, and the same method is refit per replicate.  Replicates whose
    refit raises or fails to converge are dropped; more than 10% drops is an
    error.
    """
    method = method.upper()
    if method not in _REGRESSION_FITTERS:
        raise ValueError(f"method must be one of {sorted(_REGRESSION_FITTERS)}")
    _check_b(B)
    fitter = _REGRESSION_FITTERS[method]
    base = fitter(problem)
    fitted = problem.X @ base.coefficients
    centered = base.residuals - base.residuals.mean()
    n = problem.n
    children = np.random.SeedSequence(seed).spawn(B)
    reps, n_failed = [], 0
    for i in range(B):
        rng = np.random.default_rng(children[i])
        idx = rng.integers(0, n, size=n)
        y_star = fitted + centered[idx]
        try:
            with _warnings.catch_warnings():
                _warnings.simplefilter("ignore")
                refit = fitter(DesignProblem(problem.X, y_star,
                                             list(problem.column_names)))
            if not refit.converged:
                raise FitFailureError("replicate did not converge")
            reps.append(refit.coefficients)
        except Exception:
            n_failed += 1
    if n_failed > 0.1 * B:
        raise FitFailureError(f"{n_failed}/{B} bootstrap refits failed")
    return _summarize(problem.column_names, base.coefficients, reps, B,
                      "residual", method, level, seed, n_failed, None,
                      keep_replicates)


def default_block_length(n: int) -> int:
    """floor(n^(1/3)), computed exactly (no floating-point cube-root slop)."""
    b = int(round(n ** (1.0 / 3.0)))
    while b**3 > n:
        b -= 1
    while (b + 1) ** 3 <= n:
        b += 1
    return b


def _ts_fitter(method: str, order: ModelOrder):
    method = method.upper()
    if method == "CSS":
        return lambda x: fit_css(x, order)
    if method == "PMM2":
        if order.q == 0 and order.P == 0 and order.Q == 0 and order.d + order.D == 0 \
                and order.p >= 1:
            return lambda x: fit_ar_pmm2(x, order.p, include_mean=order.include_mean)
        return lambda x: fit_ts_pmm2(x, order)
    if method == "PMM3":
        return lambda x: fit_ts_pmm3(x, order)
    raise ValueError(f"method must be CSS, PMM2, or PMM3, got {method!r}")


def block_bootstrap_ts(x, order: ModelOrder, method: str = "PMM2", B: int = 500,
                       block_length: int | None = None, level: float = 0.95,
                       seed: int = 0, keep_replicates: bool = False) -> BootstrapResult:
    """Carlstein non-overlapping block bootstrap for a time-series fit.

    Base-fit residuals are cut into consecutive non-overlapping blocks (a
    shorter trailing block is kept and equally eligible), blocks are
    resampled with replacement and concatenated to the residual length, the
    fitted recursion is driven by the resampled residuals (then integrated
    when d + D > 0), and the model is refit per replicate.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if block_length is None:
        block_length = default_block_length(n)
    _check_b(B)
    base = _ts_fitter(method, order)(x)
    resid = np.asarray(base.residuals, dtype=float)
    n_w = resid.size
    if block_length < 2:
        raise ValueError(f"block_length must be >= 2, got {block_length}")
    if n / block_length < 5:
        raise ValueError(f"need n / block_length >= 5, got {n / block_length:.2f}")
    blocks = [resid[i:i + block_length] for i in range(0, n_w, block_length)]
    a = expand_polynomial(base.params.phi, base.params.Phi, order.s)
    b = ma_expand_polynomial(base.params.theta, base.params.Theta, order.s)
    num = np.concatenate([[1.0], b])
    den = np.concatenate([[1.0], -a])
    head = x[:order.d + order.D * order.s]
    fitter = _ts_fitter(method, order)
    children = np.random.SeedSequence(seed).spawn(B)
    reps, n_failed = [], 0
    n_blocks = len(blocks)
    for i in range(B):
        rng = np.random.default_rng(children[i])
        parts, total = [], 0
        while total < n_w:
            blk = blocks[int(rng.integers(0, n_blocks))]
            parts.append(blk)
            total += blk.size
        eps_star = np.concatenate(parts)[:n_w]
        w_star = lfilter(num, den, eps_star) + base.params.mean
        if order.d + order.D > 0:
            x_star = np.concatenate([head, integrate_forecast(
                head, w_star, order.d, order.D, order.s)])
        else:
            x_star = w_star
        try:
            with _warnings.catch_warnings():
                _warnings.simplefilter("ignore")
                refit = fitter(x_star)
            if not refit.converged:
                raise FitFailureError("replicate did not converge")
            reps.append(refit.params.to_vector(order))
        except Exception:
            n_failed += 1
    if n_failed > 0.1 * B:
        raise FitFailureError(f"{n_failed}/{B} bootstrap refits failed")
    return _summarize(param_names(order), base.params.to_vector(order), reps, B,
                      "block", method.upper(), level, seed, n_failed,
                      block_length, keep_replicates)
