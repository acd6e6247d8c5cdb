"""Data-driven method selection among OLS/CSS, PMM2, and PMM3.

Decision rule, applied to the sample cumulants of baseline residuals:

1. |gamma3| < symmetric_threshold and gamma4 < 0  ->  PMM3
2. else |gamma3| >= skew_threshold and g2 < g2_ceiling  ->  PMM2
3. else  ->  OLS_CSS

Defaults (0.3 skew threshold with the g2 < 0.95 guard, 0.1 symmetry
threshold) follow observed dispatcher behavior; the stricter 0.5 threshold
is available through DispatchConfig.  The PMM3 branch requires gamma4 < 0
even though symmetric leptokurtic laws can also profit from PMM3 - the rule
is deliberately conservative.
"""

from dataclasses import dataclass

import numpy as np

from .cumulants import MomentSet, central_moments, g3_coefficient
from .errors import DegenerateInputError, InadmissibleCumulantsError, InputTooShortError
from .linmodel import DesignProblem, fit_ols, fit_pmm2, fit_pmm3, information_criteria
from .tscore import ModelOrder, fit_css
from .tspmm import fit_ar_pmm2, fit_ts_pmm2, fit_ts_pmm3

__all__ = [
    "DispatchConfig",
    "DispatchDecision",
    "select_method",
    "dispatch_fit",
    "render_decision",
]


@dataclass(frozen=True)
class DispatchConfig:
    skew_threshold: float = 0.3
    g2_ceiling: float = 0.95
    symmetric_threshold: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.symmetric_threshold < self.skew_threshold:
            raise ValueError("need 0 < symmetric_threshold < skew_threshold")
        if not 0.0 < self.g2_ceiling <= 1.0:
            raise ValueError("need 0 < g2_ceiling <= 1")


@dataclass
class DispatchDecision:
    method: str  # "OLS_CSS" | "PMM2" | "PMM3"
    n: int
    gamma3: float
    gamma4: float
    gamma6: float
    g2: float
    g3: float | None
    rationale: str
    thresholds: DispatchConfig


def _clamped_g2(mom: MomentSet) -> float:
    denom = mom.gamma4 + 2.0
    if denom <= 0.0:
        return 0.0
    return min(1.0, max(0.0, 1.0 - mom.gamma3**2 / denom))


def select_method(residuals, config: DispatchConfig | None = None) -> DispatchDecision:
    """Apply the dispatch rule to a residual vector."""
    config = config or DispatchConfig()
    residuals = np.asarray(residuals, dtype=float)
    if residuals.size < 8:
        raise InputTooShortError(f"need at least 8 residuals, got {residuals.size}")
    mom = central_moments(residuals)
    if mom.degenerate:
        raise DegenerateInputError("residuals have zero variance")
    g2 = _clamped_g2(mom)
    try:
        g3 = g3_coefficient(mom.gamma4, mom.gamma6)
    except InadmissibleCumulantsError:
        g3 = None
    a3 = abs(mom.gamma3)
    if a3 < config.symmetric_threshold and mom.gamma4 < 0.0:
        method = "PMM3"
        gain = f" ({(1.0 - g3) * 100.0:.1f}% variance reduction)" if g3 is not None else ""
        rationale = (f"|gamma3| = {a3:.3f} < {config.symmetric_threshold:g} and "
                     f"gamma4 = {mom.gamma4:.3f} < 0: symmetric platykurtic "
                     f"residuals, PMM3 applicable{gain}")
    elif a3 >= config.skew_threshold and g2 < config.g2_ceiling:
        method = "PMM2"
        rationale = (f"|gamma3| = {a3:.3f} > {config.skew_threshold:g} and "
                     f"g2 = {g2:.3f} < {config.g2_ceiling:g}: moderate asymmetry, "
                     f"PMM2 worthwhile ({(1.0 - g2) * 100.0:.1f}% variance reduction)")
    else:
        method = "OLS_CSS"
        if a3 >= config.skew_threshold:
            rationale = (f"|gamma3| = {a3:.3f} but g2 = {g2:.3f} >= "
                         f"{config.g2_ceiling:g}: negligible PMM2 gain. Use OLS.")
        else:
            rationale = (f"gamma3 = {mom.gamma3:.3f}, gamma4 = {mom.gamma4:.3f}: "
                         "near-Gaussian residuals. No PMM advantage expected. Use OLS.")
    return DispatchDecision(method, mom.n, mom.gamma3, mom.gamma4, mom.gamma6,
                            g2, g3, rationale, config)


def render_decision(decision: DispatchDecision) -> str:
    """Three-line transcript: cumulants, efficiency coefficients, rationale."""
    g3_text = f"{decision.g3:.3f}" if decision.g3 is not None else "n/a"
    return (f"n = {decision.n} | gamma3 = {decision.gamma3:+.3f} | "
            f"gamma4 = {decision.gamma4:+.3f}\n"
            f"  g2(PMM2) = {decision.g2:.3f}  |  g3(PMM3) = {g3_text}\n"
            f"  >>> {decision.rationale}")


def _scan_ar_order(x, max_p: int = 5) -> ModelOrder:
    """Pick the AR order (p <= max_p) minimizing the AIC of the CSS fit."""
    best = None
    for p in range(max_p + 1):
        order = ModelOrder(p=p)
        try:
            fit = fit_css(x, order)
        except InputTooShortError:
            break
        _, aic, _ = information_criteria(fit)
        if best is None or aic < best[0]:
            best = (aic, order)
    if best is None:
        raise InputTooShortError("series too short for any AR order scan")
    return best[1]


def dispatch_fit(data, kind: str, config: DispatchConfig | None = None,
                 order: ModelOrder | None = None):
    """Select a method from baseline residuals, then fit with it.

    ``kind`` is "timeseries" (data is a series; baseline CSS of ``order``, by
    default the AR order minimizing AIC over p <= 5) or "regression" (data is
    a DesignProblem; baseline OLS).  Returns (decision, fit).
    """
    config = config or DispatchConfig()
    if kind == "timeseries":
        x = np.asarray(data, dtype=float)
        if order is None:
            order = _scan_ar_order(x)
        base = fit_css(x, order)
        decision = select_method(base.residuals, config)
        if decision.method == "PMM2":
            if order.q == 0 and order.P == 0 and order.Q == 0 and order.d + order.D == 0 \
                    and order.p >= 1:
                fit = fit_ar_pmm2(x, order.p, include_mean=order.include_mean)
            else:
                fit = fit_ts_pmm2(x, order)
        elif decision.method == "PMM3":
            fit = fit_ts_pmm3(x, order)
        else:
            fit = base
        return decision, fit
    if kind == "regression":
        problem: DesignProblem = data
        base = fit_ols(problem)
        decision = select_method(base.residuals, config)
        if decision.method == "PMM2":
            fit = fit_pmm2(problem)
        elif decision.method == "PMM3":
            fit = fit_pmm3(problem)
        else:
            fit = base
        return decision, fit
    raise ValueError(f"kind must be 'timeseries' or 'regression', got {kind!r}")
