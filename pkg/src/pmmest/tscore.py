"""Time-series infrastructure: differencing, lag designs, CSS residuals and fitting.

Conventions (documented because sign conventions vary between packages):

* AR coefficients are the positive lag weights of
  ``x_t = sum_j phi_j x_{t-j} + ...``, so the AR polynomial is
  ``1 - sum_j phi_j B^j``.
* The MA polynomial is ``1 + sum_k theta_k B^k`` (innovations added).
* Seasonal polynomials multiply the nonseasonal ones (multiplicative model).
* CSS residuals use the strict conditional convention: presample values of
  both the differenced series and the residuals are zero.
"""

import math
import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .cumulants import MomentSet, central_moments
from .errors import InputTooShortError
from .linmodel import DesignProblem, build_design, fit_ols

__all__ = [
    "ModelOrder",
    "TsParams",
    "TsFit",
    "difference",
    "integrate_forecast",
    "ar_design_matrix",
    "expand_polynomial",
    "ma_expand_polynomial",
    "css_residuals",
    "fit_css",
    "simulate_arima",
    "ts_asymptotic_covariance",
]


@dataclass(frozen=True)
class ModelOrder:
    """(p, d, q)(P, D, Q)_s specification of a seasonal ARIMA model.

    ``include_mean`` defaults to True for undifferenced models and is forced
    False whenever d + D > 0.
    """

    p: int = 0
    d: int = 0
    q: int = 0
    P: int = 0
    D: int = 0
    Q: int = 0
    s: int = 0
    include_mean: bool | None = None

    def __post_init__(self):
        for name in ("p", "d", "q", "P", "D", "Q", "s"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
        if self.s == 0 and (self.P or self.D or self.Q):
            raise ValueError("seasonal terms require a seasonal period s >= 2")
        if self.s == 1:
            raise ValueError("seasonal period s must be 0 or >= 2")
        if self.include_mean is None:
            object.__setattr__(self, "include_mean", self.d + self.D == 0)
        elif self.include_mean and self.d + self.D > 0:
            object.__setattr__(self, "include_mean", False)

    @property
    def n_params(self) -> int:
        return self.p + self.q + self.P + self.Q + int(self.include_mean)


@dataclass
class TsParams:
    """Coefficient vectors matching a ModelOrder."""

    phi: np.ndarray
    theta: np.ndarray
    Phi: np.ndarray
    Theta: np.ndarray
    mean: float = 0.0

    def __post_init__(self):
        self.phi = np.atleast_1d(np.asarray(self.phi, dtype=float))
        self.theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        self.Phi = np.atleast_1d(np.asarray(self.Phi, dtype=float))
        self.Theta = np.atleast_1d(np.asarray(self.Theta, dtype=float))
        self.mean = float(self.mean)

    @classmethod
    def zeros(cls, order: ModelOrder) -> "TsParams":
        return cls(np.zeros(order.p), np.zeros(order.q),
                   np.zeros(order.P), np.zeros(order.Q), 0.0)

    def check_order(self, order: ModelOrder):
        sizes = (self.phi.size, self.theta.size, self.Phi.size, self.Theta.size)
        expected = (order.p, order.q, order.P, order.Q)
        if sizes != expected:
            raise ValueError(f"parameter lengths {sizes} do not match order {expected}")

    def to_vector(self, order: ModelOrder) -> np.ndarray:
        self.check_order(order)
        parts = [self.phi, self.theta, self.Phi, self.Theta]
        if order.include_mean:
            parts.append([self.mean])
        return np.concatenate([np.asarray(p, dtype=float) for p in parts]) \
            if order.n_params else np.empty(0)

    @classmethod
    def from_vector(cls, vec, order: ModelOrder) -> "TsParams":
        vec = np.asarray(vec, dtype=float)
        if vec.size != order.n_params:
            raise ValueError(f"expected {order.n_params} parameters, got {vec.size}")
        i = 0
        phi = vec[i:i + order.p]; i += order.p
        theta = vec[i:i + order.q]; i += order.q
        Phi = vec[i:i + order.P]; i += order.P
        Theta = vec[i:i + order.Q]; i += order.Q
        mean = vec[i] if order.include_mean else 0.0
        return cls(phi, theta, Phi, Theta, mean)


def param_names(order: ModelOrder) -> list[str]:
    names = [f"ar{j}" for j in range(1, order.p + 1)]
    names += [f"ma{j}" for j in range(1, order.q + 1)]
    names += [f"sar{j}" for j in range(1, order.P + 1)]
    names += [f"sma{j}" for j in range(1, order.Q + 1)]
    if order.include_mean:
        names.append("mean")
    return names


@dataclass
class TsFit:
    method: str  # "CSS" | "PMM2" | "PMM3"
    order: ModelOrder
    params: TsParams
    residuals: np.ndarray
    original_series: np.ndarray
    moments: MomentSet | None
    g_coefficient: float
    objective: float
    converged: bool
    warnings: list[str] = field(default_factory=list)

    @property
    def n_params(self) -> int:
        return self.order.n_params

    @property
    def coefficients(self) -> np.ndarray:
        return self.params.to_vector(self.order)

    @property
    def param_names(self) -> list[str]:
        return param_names(self.order)


# ---------------------------------------------------------------------------
# Differencing and integration
# ---------------------------------------------------------------------------

def difference(x, d: int = 0, D: int = 0, s: int = 0) -> np.ndarray:
    """Apply (1-B)^d (1-B^s)^D; output length = len(x) - d - D*s."""
    x = np.asarray(x, dtype=float)
    if D > 0 and s < 2:
        raise ValueError("seasonal differencing requires s >= 2")
    if x.size <= d + D * s:
        raise InputTooShortError(
            f"series of length {x.size} too short for d={d}, D={D}, s={s}")
    for _ in range(d):
        x = np.diff(x)
    for _ in range(D):
        x = x[s:] - x[:-s]
    return x


def integrate_forecast(history, diffs_forecast, d: int = 0, D: int = 0,
                       s: int = 0) -> np.ndarray:
    """Invert differencing: extend ``history`` by the integrated forecasts.

    ``diffs_forecast`` holds future values on the (1-B)^d (1-B^s)^D scale;
    the return value is on the original scale and satisfies the round trip
    integrate_forecast(x[:m], difference(x)[m - d - D*s:]) == x[m:].
    """
    history = np.asarray(history, dtype=float)
    fc = np.asarray(diffs_forecast, dtype=float)
    if D > 0 and s < 2:
        raise ValueError("seasonal integration requires s >= 2")
    if history.size < d + D * s:
        raise InputTooShortError(
            f"history of length {history.size} cannot seed d={d}, D={D}, s={s}")
    regular = [history]
    h = history
    for _ in range(d):
        h = np.diff(h)
        regular.append(h)
    seasonal = [h]
    for _ in range(D):
        h = h[s:] - h[:-s]
        seasonal.append(h)
    for j in range(D, 0, -1):
        seed = seasonal[j - 1][-s:]  # last s values at the coarser level
        out = np.empty(fc.size)
        for t, v in enumerate(fc):
            out[t] = v + (seed[t] if t < s else out[t - s])
        fc = out
    for j in range(d, 0, -1):
        fc = np.cumsum(fc) + regular[j - 1][-1]
    return fc


# ---------------------------------------------------------------------------
# Lag polynomial expansion and the CSS recursion
# ---------------------------------------------------------------------------

def expand_polynomial(nonseasonal, seasonal=(), s: int = 0) -> np.ndarray:
    """Lag coefficients of the product (1 - sum c_j B^j)(1 - sum C_k B^{sk}).

    Input and output are in the positive-lag-weight convention: a returned
    vector ``a`` means the polynomial ``1 - sum_l a_l B^l``.
    """
    c = np.atleast_1d(np.asarray(nonseasonal, dtype=float))
    C = np.atleast_1d(np.asarray(seasonal, dtype=float))
    if C.size and s < 2:
        raise ValueError("seasonal coefficients require s >= 2")
    p1 = np.concatenate([[1.0], -c])
    p2 = np.zeros(1 + s * C.size)
    p2[0] = 1.0
    for k in range(C.size):
        p2[s * (k + 1)] = -C[k]
    prod = np.convolve(p1, p2)
    return -prod[1:]


def ma_expand_polynomial(theta, Theta=(), s: int = 0) -> np.ndarray:
    """Lag coefficients b of (1 + sum theta B^k)(1 + sum Theta B^{sk}) = 1 + sum b B^l."""
    return -expand_polynomial(-np.atleast_1d(np.asarray(theta, dtype=float)),
                              -np.atleast_1d(np.asarray(Theta, dtype=float)), s)


def css_residuals(w, params: TsParams, order: ModelOrder) -> np.ndarray:
    """Conditional-sum-of-squares residual recursion on the differenced series.

    With a = expand_polynomial(phi, Phi, s) and b = ma_expand_polynomial(theta,
    Theta, s), computes e_t = (w_t - mean) - sum_j a_j (w_{t-j} - mean)
    - sum_k b_k e_{t-k}, with presample w and e terms treated as zero.
    """
    params.check_order(order)
    w = np.asarray(w, dtype=float)
    z = w - params.mean
    a = expand_polynomial(params.phi, params.Phi, order.s)
    b = ma_expand_polynomial(params.theta, params.Theta, order.s)
    num = np.concatenate([[1.0], -a])
    den = np.concatenate([[1.0], b])
    return lfilter(num, den, z)


def ar_design_matrix(x, p: int, include_mean: bool = True) -> DesignProblem:
    """Lagged design for an AR(p): response x_t, columns x_{t-1} .. x_{t-p}."""
    x = np.asarray(x, dtype=float)
    if p < 1:
        raise ValueError(f"AR design requires p >= 1, got {p}")
    if x.size <= p:
        raise InputTooShortError(f"series length {x.size} too short for p = {p}")
    n = x.size
    y = x[p:]
    cols = [x[p - j:n - j] for j in range(1, p + 1)]
    names = [f"ar{j}" for j in range(1, p + 1)]
    return build_design(y, cols, include_intercept=include_mean, column_names=names)


# ---------------------------------------------------------------------------
# Quasi-Newton minimization
# ---------------------------------------------------------------------------

def _central_gradient(f, x, base_step: float = 1e-6) -> np.ndarray:
    g = np.empty(x.size)
    for i in range(x.size):
        h = base_step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def minimize_qn(f, x0, gtol: float = 1e-8, ftol: float = 1e-12,
                max_iter: int = 500, max_step: float = 0.1):
    """Damped BFGS with central finite-difference gradients; returns (x, fun, converged).

    Line search is monotone (Armijo backtracking) and each iteration's step is
    capped at max_step * max(1, |x|_inf).  This keeps the iterates in the
    basin of the start point, which matters for the PMM polynomial objectives:
    they can be unbounded below in explosive parameter regions, and the
    estimator is defined as the local minimizer reached from the CSS start.
    Stops on gradient norm < gtol, relative objective change < ftol, or the
    iteration cap.
    """
    x = np.array(x0, dtype=float)
    fx = float(f(x))
    if x.size == 0:
        return x, fx, True
    n = x.size
    g = _central_gradient(f, x)
    H = np.eye(n)
    converged = False
    for _ in range(max_iter):
        gnorm = float(np.max(np.abs(g)))
        if gnorm < gtol:
            converged = True
            break
        d = -H @ g
        if not np.isfinite(d).all() or float(d @ g) >= 0.0:
            H = np.eye(n)
            d = -g
        dnorm = float(np.max(np.abs(d)))
        cap = max_step * max(1.0, float(np.max(np.abs(x))))
        alpha = min(1.0, cap / dnorm) if dnorm > 0.0 else 1.0
        slope = float(g @ d)
        accepted = False
        for _ in range(50):
            xn = x + alpha * d
            fn = float(f(xn))
            if math.isfinite(fn) and fn <= fx + 1e-4 * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # no Armijo progress: finite-difference noise floor reached
            converged = gnorm <= 1e-5 * max(1.0, abs(fx))
            break
        gn = _central_gradient(f, xn)
        s = xn - x
        yv = gn - g
        sy = float(s @ yv)
        if sy > 1e-12 * float(np.linalg.norm(s)) * float(np.linalg.norm(yv)):
            rho = 1.0 / sy
            V = np.eye(n) - rho * np.outer(s, yv)
            H = V @ H @ V.T + rho * np.outer(s, s)
        rel_drop = abs(fx - fn) / max(1.0, abs(fx))
        x, fx, g = xn, fn, gn
        if rel_drop < ftol:
            converged = True
            break
    if not converged and float(np.max(np.abs(g))) <= 1e-5 * max(1.0, abs(fx)):
        converged = True
    return x, fx, converged


# ---------------------------------------------------------------------------
# CSS estimation and simulation
# ---------------------------------------------------------------------------

def _min_series_length(order: ModelOrder) -> int:
    return (order.p + order.q + order.s * (order.P + order.Q)
            + order.d + order.D * order.s + 5)


def _unit_region_warnings(params: TsParams, order: ModelOrder, warns: list[str]):
    a = expand_polynomial(params.phi, params.Phi, order.s)
    if a.size:
        roots = np.roots(np.concatenate([-a[::-1], [1.0]]))
        if roots.size and np.min(np.abs(roots)) <= 1.0 + 1e-8:
            warns.append("AR polynomial has a root on or inside the unit circle "
                         "(non-stationary region)")
    b = ma_expand_polynomial(params.theta, params.Theta, order.s)
    if b.size:
        roots = np.roots(np.concatenate([b[::-1], [1.0]]))
        if roots.size and np.min(np.abs(roots)) <= 1.0 + 1e-8:
            warns.append("MA polynomial has a root on or inside the unit circle "
                         "(non-invertible region)")


def _finish_ts_fit(method, x, w, params, order, warns, converged,
                   g: float = 1.0, moments: MomentSet | None = None) -> TsFit:
    residuals = css_residuals(w, params, order)
    objective = float(np.sum(residuals * residuals))
    if moments is None and residuals.size >= 4:
        moments = central_moments(residuals)
    _unit_region_warnings(params, order, warns)
    return TsFit(method, order, params, residuals, np.asarray(x, dtype=float),
                 moments, g, objective, converged, warns)


def fit_css(x, order: ModelOrder) -> TsFit:
    """Conditional-sum-of-squares estimation.

    Pure nonseasonal AR models are solved exactly by OLS on the lag design;
    anything with MA or seasonal terms is minimized by quasi-Newton from a
    zero start (sample mean for the mean term).
    """
    x = np.asarray(x, dtype=float)
    if x.size <= _min_series_length(order):
        raise InputTooShortError(
            f"series length {x.size} too short for order requiring "
            f"> {_min_series_length(order)} observations")
    w = difference(x, order.d, order.D, order.s)
    warns: list[str] = []
    if order.p == 0 and order.q == 0 and order.P == 0 and order.Q == 0:
        mean = float(np.mean(w)) if order.include_mean else 0.0
        params = TsParams.zeros(order)
        params.mean = mean
        return _finish_ts_fit("CSS", x, w, params, order, warns, True)
    if order.q == 0 and order.P == 0 and order.Q == 0:
        problem = ar_design_matrix(w, order.p, include_mean=order.include_mean)
        ofit = fit_ols(problem)
        if order.include_mean:
            intercept, phi = ofit.coefficients[0], ofit.coefficients[1:]
            ar_sum = 1.0 - float(np.sum(phi))
            if abs(ar_sum) > 1e-10:
                mean = intercept / ar_sum
            else:
                mean = float(np.mean(w))
                warns.append("AR coefficients sum to ~1; mean set to the sample mean")
        else:
            phi, mean = ofit.coefficients, 0.0
        params = TsParams(phi, np.empty(0), np.empty(0), np.empty(0), mean)
        return _finish_ts_fit("CSS", x, w, params, order, warns, True)
    start = TsParams.zeros(order)
    if order.include_mean:
        start.mean = float(np.mean(w))
    vec0 = start.to_vector(order)

    def objective(vec):
        eps = css_residuals(w, TsParams.from_vector(vec, order), order)
        with np.errstate(over="ignore", invalid="ignore"):
            return float(np.sum(eps * eps))

    vec, _, converged = minimize_qn(objective, vec0)
    if not converged:
        warns.append("CSS optimizer did not converge")
        _warnings.warn("fit_css did not converge", RuntimeWarning, stacklevel=2)
    params = TsParams.from_vector(vec, order)
    return _finish_ts_fit("CSS", x, w, params, order, warns, converged)


def simulate_arima(order: ModelOrder, params: TsParams, innovations,
                   burnin: int = 0) -> np.ndarray:
    """Drive the ARMA recursion with given innovations, then integrate d/D times.

    The first ``burnin`` generated values are discarded before integration, so
    the output has length len(innovations) - burnin.  Burn-in only makes sense
    for stationary AR polynomials; this is not enforced.
    """
    params.check_order(order)
    eps = np.asarray(innovations, dtype=float)
    if burnin < 0 or burnin >= eps.size:
        raise ValueError(f"burnin={burnin} must be in [0, len(innovations))")
    a = expand_polynomial(params.phi, params.Phi, order.s)
    b = ma_expand_polynomial(params.theta, params.Theta, order.s)
    num = np.concatenate([[1.0], b])
    den = np.concatenate([[1.0], -a])
    z = lfilter(num, den, eps)[burnin:]
    if order.include_mean:
        z = z + params.mean
    for _ in range(order.d):
        z = np.cumsum(z)
    for _ in range(order.D):
        z = z.copy()
        for offset in range(order.s):
            z[offset::order.s] = np.cumsum(z[offset::order.s])
    return z


def ts_asymptotic_covariance(fit: TsFit) -> np.ndarray:
    """Gauss-Newton asymptotic covariance g * m2 * (J'J)^-1, J = d(residuals)/d(params)."""
    order = fit.order
    if fit.moments is None:
        raise ValueError("covariance requires residual moments")
    vec = fit.params.to_vector(order)
    if vec.size == 0:
        return np.zeros((0, 0))
    w = difference(fit.original_series, order.d, order.D, order.s)
    J = np.empty((w.size, vec.size))
    for i in range(vec.size):
        h = 1e-6 * max(1.0, abs(vec[i]))
        vp = vec.copy()
        vm = vec.copy()
        vp[i] += h
        vm[i] -= h
        rp = css_residuals(w, TsParams.from_vector(vp, order), order)
        rm = css_residuals(w, TsParams.from_vector(vm, order), order)
        J[:, i] = (rp - rm) / (2.0 * h)
    jtj = J.T @ J
    return fit.g_coefficient * fit.moments.m2 * np.linalg.inv(jtj)
