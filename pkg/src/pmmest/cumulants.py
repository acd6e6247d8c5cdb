"""Sample moments, standardized cumulants, and polynomial-score efficiency coefficients.

Conventions used throughout the package:

* ``m2`` is the sample variance with denominator ``n - 1``; ``m3``, ``m4``,
  ``m6`` are central moments with denominator ``n``.
* ``gamma3 = m3 / m2**1.5`` (skewness), ``gamma4 = m4 / m2**2 - 3`` (excess
  kurtosis), ``gamma6 = m6 / m2**3 - 15*gamma4 - 10*gamma3**2 - 15`` (sixth
  standardized cumulant).
* ``g2 = 1 - gamma3**2 / (gamma4 + 2)`` is the ratio of the PMM2 asymptotic
  variance to the OLS/CSS one; ``g3 = 1 - gamma4**2 / (6 + 9*gamma4 + gamma6)``
  is the symmetric PMM3 analogue.  Both live in [0, 1] for admissible
  cumulants.

Admissibility violations (possible for small-sample plug-in estimates) raise
errors here; callers decide whether to clamp or fall back.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDistributionError,
    DegenerateMomentsError,
    InadmissibleCumulantsError,
    InputTooShortError,
)

__all__ = [
    "MomentSet",
    "CumulantProfile",
    "central_moments",
    "g2_coefficient",
    "g3_coefficient",
    "pmm2_weight",
    "pmm3_weights",
]


@dataclass(frozen=True)
class MomentSet:
    """Sample central moments and standardized cumulants of one vector.

    ``degenerate`` is True for constant input, in which case the moments are
    all zero and the standardized cumulants are NaN.
    """

    n: int
    mean: float
    m2: float
    m3: float
    m4: float
    m6: float
    gamma3: float
    gamma4: float
    gamma6: float
    degenerate: bool = False


@dataclass(frozen=True)
class CumulantProfile:
    """Population cumulants of an innovation law plus its efficiency coefficients.

    ``gamma6`` and ``g3`` are None when no sixth-cumulant closed form is
    implemented for the family.
    """

    gamma3: float
    gamma4: float
    gamma6: float | None
    g2: float
    g3: float | None


def central_moments(x, m2_ddof: int = 1) -> MomentSet:
    """Compute the sample MomentSet of a vector.

    Parameters
    ----------
    x : array_like
        Data vector, length >= 4.
    m2_ddof : int
        Denominator offset for the variance (1 gives the unbiased n-1
        denominator, 0 the plug-in n denominator).  Higher moments always use
        denominator n.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        x = x.ravel()
    n = x.size
    if n < 4:
        raise InputTooShortError(f"need at least 4 observations, got {n}")
    mean = float(x.mean())
    d = x - mean
    m2 = float(np.sum(d * d) / (n - m2_ddof))
    m3 = float(np.mean(d**3))
    m4 = float(np.mean(d**4))
    m6 = float(np.mean(d**6))
    if m2 == 0.0:
        return MomentSet(n, mean, 0.0, 0.0, 0.0, 0.0,
                         math.nan, math.nan, math.nan, degenerate=True)
    gamma3 = m3 / m2**1.5
    gamma4 = m4 / m2**2 - 3.0
    gamma6 = m6 / m2**3 - 15.0 * gamma4 - 10.0 * gamma3**2 - 15.0
    return MomentSet(n, mean, m2, m3, m4, m6, gamma3, gamma4, gamma6)


def g2_coefficient(gamma3: float, gamma4: float) -> float:
    """PMM2-to-OLS asymptotic variance ratio, 1 - gamma3^2 / (gamma4 + 2).

    Raises InadmissibleCumulantsError when gamma4 + 2 <= 0 or the cumulant
    inequality gamma3^2 <= gamma4 + 2 fails.  Never clamps: sample estimates
    may transiently violate the inequality and the caller owns the fallback.
    """
    denom = gamma4 + 2.0
    if denom <= 0.0:
        raise InadmissibleCumulantsError(f"gamma4 + 2 = {denom:g} is not positive")
    if gamma3 * gamma3 > denom:
        raise InadmissibleCumulantsError(
            f"cumulant inequality violated: gamma3^2 = {gamma3 * gamma3:g} "
            f"> gamma4 + 2 = {denom:g}")
    return 1.0 - gamma3 * gamma3 / denom


def g3_coefficient(gamma4: float, gamma6: float) -> float:
    """Symmetric PMM3-to-OLS variance ratio, 1 - gamma4^2 / (6 + 9*gamma4 + gamma6).

    Admissibility for symmetric laws requires gamma4 >= -2 and
    6 + 9*gamma4 + gamma6 >= gamma4^2 with a positive denominator.
    """
    if gamma4 < -2.0:
        raise InadmissibleCumulantsError(f"gamma4 = {gamma4:g} below -2")
    denom = 6.0 + 9.0 * gamma4 + gamma6
    if denom <= 0.0:
        raise InadmissibleCumulantsError(
            f"6 + 9*gamma4 + gamma6 = {denom:g} is not positive")
    if gamma4 * gamma4 > denom:
        raise InadmissibleCumulantsError(
            f"admissibility violated: gamma4^2 = {gamma4 * gamma4:g} > {denom:g}")
    return 1.0 - gamma4 * gamma4 / denom


def pmm2_weight(m2: float, m3: float, m4: float) -> float:
    """Variance-minimizing quadratic correction weight c = -m3 / (m4 - m2^2).

    The corrected score e + c*(e^2 - m2) has variance
    m2 + 2*c*m3 + c^2*(m4 - m2^2), minimized at the returned c with minimum
    value m2 * g2.  Units: 1 / data-unit.
    """
    spread = m4 - m2 * m2
    if spread <= 0.0:
        raise DegenerateDistributionError(
            f"m4 - m2^2 = {spread:g} is not positive; quadratic weight undefined")
    return -m3 / spread


def pmm3_weights(m2: float, m4: float, m6: float) -> tuple[float, float]:
    """Cubic-score weights (b1, b3) solving [[m2, m4], [m4, m6]] b = (1, 3*m2).

    For a symmetric error law the score psi(e) = b1*e + b3*e^3 then has
    E[psi] = 0, E[psi'] = b1 + 3*m2*b3 > 0, and estimating-equation variance
    1 / (b1 + 3*m2*b3) = m2 * g3.  The solution is returned unnormalized;
    positive rescaling leaves the estimator's root unchanged.
    """
    det = m2 * m6 - m4 * m4
    if m2 <= 0.0 or det <= 0.0:
        raise DegenerateMomentsError(
            f"moment matrix [[m2={m2:g}, m4={m4:g}], [m4, m6={m6:g}]] "
            "is not positive definite")
    b1 = (m6 - 3.0 * m2 * m4) / det
    b3 = (3.0 * m2 * m2 - m4) / det
    return b1, b3
