"""Finite-sample intervals ``[mean_x/mean_y - t, mean_x/mean_y + t]``.

Four half-widths are provided: Chebyshev-based and Hoeffding-based, each in a
well-separated version (denominator bounded away from zero almost surely) and
a general version. The general versions only exist above a level threshold;
below it they report infeasibility with an infinite half-width instead of
raising, because callers routinely sweep infeasible regions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from ratioci.core import UNDEFINED, Interval, MomentBounds, PairedSample, SupportBounds, ratio_estimate

INFEASIBLE = math.inf


class Method(enum.Enum):
    BC_EASY = "bc_easy"
    BC_GENERAL = "bc_general"
    HOEFF_EASY = "hoeff_easy"
    HOEFF_GENERAL = "hoeff_general"

    @property
    def bounds_type(self) -> type:
        return MomentBounds if self in (Method.BC_EASY, Method.BC_GENERAL) else SupportBounds


@dataclass(frozen=True)
class NonasymptoticCi:
    interval: Interval
    half_width: float
    method: Method
    feasible: bool


def _check(n: int, alpha: float) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def bc_easy_halfwidth(n: int, alpha: float, mb: MomentBounds, a_y: float) -> float:
    _check(n, alpha)
    if not a_y > 0:
        raise ValueError("the well-separated interval needs a_y > 0")
    root = math.sqrt((mb.u_x + mb.excess_y) / (n * alpha))
    return root / mb.l_y * (1.0 + (root + math.sqrt(mb.u_x)) / a_y)


def bc_alpha_bar(n: int, mb: MomentBounds) -> float:
    return 2.0 * mb.excess_y / (n * mb.l_y**2)


def bc_general_halfwidth(n: int, alpha: float, mb: MomentBounds) -> float:
    """Half-width of the general Chebyshev interval, or ``inf`` when infeasible."""
    _check(n, alpha)
    if alpha <= bc_alpha_bar(n, mb):
        return INFEASIBLE
    eps = math.sqrt(2.0 * mb.u_x / (n * alpha))
    eps_y = math.sqrt(2.0 * mb.excess_y / (n * alpha * mb.l_y**2))
    return ((math.sqrt(mb.u_x) + eps) * eps_y / (1.0 - eps_y) ** 2 + eps) / mb.l_y


def hoeff_easy_halfwidth(n: int, alpha: float, sb: SupportBounds) -> float:
    _check(n, alpha)
    if not sb.a_y > 0:
        raise ValueError("the well-separated interval needs a_y > 0")
    u = max(sb.range_x, sb.range_y) ** 2
    root = math.sqrt(u * math.log(4.0 / alpha) / (2.0 * n))
    return root / sb.l_y * (1.0 + (sb.max_abs_x + root) / sb.a_y)


def hoeff_gammas(sb: SupportBounds) -> tuple[float, float]:
    """Hoeffding exponents for the numerator and the normalised denominator."""
    return 2.0 / sb.range_x**2, 2.0 * sb.l_y**2 / sb.range_y**2


def hoeff_alpha_bar(n: int, sb: SupportBounds) -> float:
    return 4.0 * math.exp(-n * hoeff_gammas(sb)[1])


def hoeff_general_halfwidth(n: int, alpha: float, sb: SupportBounds) -> float:
    """Half-width of the general Hoeffding interval, or ``inf`` when infeasible."""
    _check(n, alpha)
    gamma_x, gamma_y = hoeff_gammas(sb)
    log_term = math.log(4.0 / alpha)
    # Same condition as alpha > 4 exp(-n gamma_y), written without the exp.
    if log_term >= n * gamma_y:
        return INFEASIBLE
    eps_x = math.sqrt(log_term / (n * gamma_x))
    eps_y = math.sqrt(log_term / (n * gamma_y))
    lead = math.sqrt(log_term / (n * min(gamma_x, gamma_y)))
    return lead * ((sb.max_abs_x + eps_x) / (1.0 - eps_y) ** 2 + 1.0) / sb.l_y


def halfwidth(method: Method, n: int, alpha: float, bounds: MomentBounds | SupportBounds) -> float:
    if not isinstance(bounds, method.bounds_type):
        raise TypeError(f"{method.value} needs {method.bounds_type.__name__}, got {type(bounds).__name__}")
    if method is Method.BC_EASY:
        if bounds.a_y is None:
            raise ValueError("bc_easy needs MomentBounds with a_y set")
        return bc_easy_halfwidth(n, alpha, bounds, bounds.a_y)
    if method is Method.BC_GENERAL:
        return bc_general_halfwidth(n, alpha, bounds)
    if method is Method.HOEFF_EASY:
        return hoeff_easy_halfwidth(n, alpha, bounds)
    return hoeff_general_halfwidth(n, alpha, bounds)


def build_nonasymptotic_ci(
    s: PairedSample,
    alpha: float,
    method: Method,
    bounds: MomentBounds | SupportBounds,
) -> NonasymptoticCi:
    t = halfwidth(method, s.n, alpha, bounds)
    if math.isinf(t):
        return NonasymptoticCi(UNDEFINED, INFEASIBLE, method, False)
    theta = ratio_estimate(s)
    if theta is None:
        return NonasymptoticCi(UNDEFINED, t, method, True)
    return NonasymptoticCi(Interval(theta - t, theta + t), t, method, True)
