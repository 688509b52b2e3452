"""Delta-method interval for E[X]/E[Y] with a plug-in asymptotic variance."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ratioci.core import (
    UNDEFINED,
    Interval,
    PairedSample,
    SampleMoments,
    compute_moments,
    ratio_estimate,
)

# Acklam's rational approximation to the inverse normal CDF.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF (rational approximation plus one Halley step)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
            ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        )
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    # Halley refinement; work in the smaller tail to keep the residual accurate.
    if p > 0.5:
        e = 0.5 * math.erfc(x / math.sqrt(2.0)) - (1.0 - p)
        e = -e
    else:
        e = normal_cdf(x) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def plugin_sigma2(m: SampleMoments) -> float:
    """Asymptotic variance of sqrt(n)(mean_x/mean_y - E[X]/E[Y]) at the empirical moments."""
    ey = m.mean_y
    sigma2 = (
        m.var_x / ey**2
        + m.mean_x**2 * m.var_y / ey**4
        - 2.0 * m.cov_xy * m.mean_x / ey**3
    )
    return max(sigma2, 0.0)


@dataclass(frozen=True)
class DeltaCiResult:
    interval: Interval
    sigma2_hat: float | None
    theta_hat: float | None


def delta_ci(s: PairedSample, alpha: float) -> DeltaCiResult:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if s.denominator_is_zero:
        return DeltaCiResult(UNDEFINED, None, None)
    m = compute_moments(s)
    theta = ratio_estimate(s)
    sigma2 = plugin_sigma2(m)
    half = normal_quantile(1.0 - alpha / 2.0) * math.sqrt(sigma2 / s.n)
    return DeltaCiResult(Interval(theta - half, theta + half), sigma2, theta)
