"""Thresholds, indices and regime classification for ratio-of-means inference.

Level thresholds come in two flavours. ``alpha_bar_*`` is the smallest level
at which the general finite-sample interval exists; ``alpha_underline_*`` is
a level below which no bounded interval centred on the estimate can keep its
coverage over the class, because the denominator mean can be exactly zero
with at least that probability. Their mutual order is not guaranteed and is
never asserted here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from ratioci.ci_nonasymptotic import bc_alpha_bar, hoeff_alpha_bar, hoeff_gammas
from ratioci.core import MomentBounds, PairedSample, SupportBounds, compute_moments


def alpha_bar_bc(n: int, mb: MomentBounds) -> float:
    if n < 1:
        raise ValueError("n must be at least 1")
    return bc_alpha_bar(n, mb)


def n_bar_bc(alpha: float, mb: MomentBounds) -> float:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return 2.0 * mb.excess_y / (alpha * mb.l_y**2)


def alpha_bar_hoeff(n: int, sb: SupportBounds) -> float:
    return hoeff_alpha_bar(n, sb)


def n_bar_hoeff(alpha: float, sb: SupportBounds) -> float:
    return math.log(4.0 / alpha) / hoeff_gammas(sb)[1]


def plug_in_n_bar(s: PairedSample, alpha: float) -> float | None:
    """Rule of thumb: the general Chebyshev sample-size floor at empirical moments.

    When the result exceeds ``s.n`` the delta-method interval is likely to
    undercover. Returns None when the denominator mean is zero.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if s.denominator_is_zero:
        return None
    m = compute_moments(s)
    return 2.0 * (m.m2_y - m.mean_y**2) / (alpha * m.mean_y**2)


def alpha_underline_bc(n: int, mb: MomentBounds) -> float:
    return (1.0 - mb.l_y**2 / mb.u_y) ** n


def alpha_underline_hoeff(n: int, sb: SupportBounds) -> float | None:
    """Zero-denominator floor of the bounded-support class; None when it does not apply."""
    ratio = sb.l_y / sb.range_y
    if ratio >= 1.0:
        return None
    return (1.0 - ratio) ** n


class ClassKind(enum.Enum):
    BC = "bc"
    HOEFFDING = "hoeffding"


@dataclass(frozen=True)
class CriticalLevelBracket:
    alpha_lower: float | None
    alpha_upper: float
    n: int
    class_kind: ClassKind


def critical_bracket(n: int, bounds: MomentBounds | SupportBounds, kind: ClassKind) -> CriticalLevelBracket:
    if kind is ClassKind.BC:
        if not isinstance(bounds, MomentBounds):
            raise TypeError("the BC bracket needs MomentBounds")
        return CriticalLevelBracket(alpha_underline_bc(n, bounds), alpha_bar_bc(n, bounds), n, kind)
    if not isinstance(bounds, SupportBounds):
        raise TypeError("the Hoeffding bracket needs SupportBounds")
    return CriticalLevelBracket(alpha_underline_hoeff(n, bounds), alpha_bar_hoeff(n, bounds), n, kind)


def length_lower_bound(n: int, alpha: float, mb: MomentBounds) -> float | None:
    """Minimal half-width any uniformly valid centred interval must exceed.

    Returns None outside the range where the bound is established
    (``n >= 7`` and ``alpha < min(1, n / (l_y + sqrt(u_y - l_y**2))**2)``).
    """
    spread = mb.l_y + math.sqrt(mb.excess_y)
    if n < 7 or not 0.0 < alpha < min(1.0, n / spread**2):
        return None
    v = mb.u_x / spread**2
    return math.sqrt(v / (3.0 * n * alpha))


def snr(e_y: float, v22: float, gamma_y: float, n: int) -> float:
    """Denominator signal-to-noise ratio ``E[Y] sqrt(n) gamma_y / sqrt(v22)``."""
    if not (v22 > 0 and gamma_y > 0):
        raise ValueError("v22 and gamma_y must be positive")
    return e_y * math.sqrt(n) * gamma_y / math.sqrt(v22)


def snr_tilde(n: int, mb: MomentBounds) -> float:
    return mb.l_y * math.sqrt(n) / math.sqrt(mb.u_y)


class ConsistencyContext(enum.Enum):
    DELTA_METHOD = "delta_method"
    BOOTSTRAP = "bootstrap"


def bernoulli_consistency(b_exponent: float, context: ConsistencyContext) -> bool:
    """Pointwise consistency for a Bernoulli(n**-b) denominator.

    Both the delta method and the percentile bootstrap need
    ``n * p_n -> infinity``, i.e. ``b < 1``.
    """
    if b_exponent < 0:
        raise ValueError("b_exponent must be non-negative")
    if not isinstance(context, ConsistencyContext):
        raise TypeError("context must be a ConsistencyContext")
    return b_exponent < 1.0


def lemma4_check(n: int, x: float) -> bool:
    """Check ``(1 - x/n)**(n-1) >= 1/3`` for ``n >= 7`` and ``x`` in (0, 1)."""
    if n < 7 or not 0.0 < x < 1.0:
        raise ValueError("requires n >= 7 and 0 < x < 1")
    return (1.0 - x / n) ** (n - 1) >= 1.0 / 3.0


# -- regime classification ------------------------------------------------


class SnrClass(enum.Enum):
    DIVERGES = "diverges"
    CONSTANT_C = "constant_c"
    VANISHES_TO_ZERO = "vanishes_to_zero"


class Row(enum.Enum):
    """Position of ``b`` relative to ``1/2 + b'``."""

    ABOVE = "above"
    EQUAL = "equal"
    BELOW = "below"


class Col(enum.Enum):
    """Position of ``a + b'`` relative to ``b + a'``."""

    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"


class LawFamily(enum.Enum):
    GAUSSIAN_LINEAR = "gaussian_linear"
    GAUSSIAN_RATIO = "gaussian_ratio"
    RECIPROCAL_SHIFT = "reciprocal_shift"
    DETERMINISTIC_DRIFT = "deterministic_drift"
    MIXED = "mixed"


Number = float | str


@dataclass(frozen=True)
class RegimeInput:
    """Decay exponents of E[X], sd-scale of X, E[Y], sd-scale of Y, and their constants.

    Exponents may be given as decimal strings (up to 6 fractional digits) to
    make boundary comparisons exact.
    """

    a: Number
    a_prime: Number
    b: Number
    b_prime: Number
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        for name in ("a", "a_prime", "b", "b_prime"):
            value = _as_float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and non-negative")
        if self.c2 == 0:
            raise ValueError("c2 must be non-zero")


@dataclass(frozen=True)
class RegimeVerdict:
    snr_class: SnrClass
    row: Row
    col: Col
    renorm_exponent: float
    law_family: LawFamily
    delta_method_ok: bool


def _as_float(x: Number) -> float:
    return float(x)


def _as_fraction(x: Number) -> Fraction | None:
    if not isinstance(x, str):
        return None
    try:
        d = Decimal(x.strip())
    except InvalidOperation:
        raise ValueError(f"not a decimal number: {x!r}") from None
    if not d.is_finite() or -d.as_tuple().exponent > 6:
        return None
    return Fraction(d)


def _compare(lhs: list[Number], rhs: list[Number]) -> int:
    """Sign of ``sum(lhs) - sum(rhs)``: exact for short decimal strings, else 1e-12 tolerance."""
    fracs = [_as_fraction(v) for v in lhs + rhs]
    if all(f is not None for f in fracs):
        diff = sum(fracs[: len(lhs)], Fraction(0)) - sum(fracs[len(lhs):], Fraction(0))
        return (diff > 0) - (diff < 0)
    diff = sum(map(_as_float, lhs)) - sum(map(_as_float, rhs))
    if abs(diff) <= 1e-12:
        return 0
    return 1 if diff > 0 else -1


# (row, col) -> (law family, renormalisation exponent as a function of a, a', b, b').
_TABLE = {
    (Row.ABOVE, Col.LESS): (LawFamily.GAUSSIAN_RATIO, lambda a, ap, b, bp: 0.5 + bp - ap),
    (Row.ABOVE, Col.EQUAL): (LawFamily.GAUSSIAN_RATIO, lambda a, ap, b, bp: 0.5 + bp - ap),
    (Row.ABOVE, Col.GREATER): (LawFamily.DETERMINISTIC_DRIFT, lambda a, ap, b, bp: 0.5 + b - a),
    (Row.EQUAL, Col.LESS): (LawFamily.RECIPROCAL_SHIFT, lambda a, ap, b, bp: 1.0 - a + bp),
    (Row.EQUAL, Col.EQUAL): (LawFamily.MIXED, lambda a, ap, b, bp: 0.5 + bp - ap),
    (Row.EQUAL, Col.GREATER): (LawFamily.MIXED, lambda a, ap, b, bp: 0.5 + bp - ap),
    (Row.BELOW, Col.LESS): (LawFamily.GAUSSIAN_LINEAR, lambda a, ap, b, bp: 2.0 * b - a - bp),
    (Row.BELOW, Col.EQUAL): (LawFamily.GAUSSIAN_LINEAR, lambda a, ap, b, bp: b - ap),
    (Row.BELOW, Col.GREATER): (LawFamily.GAUSSIAN_LINEAR, lambda a, ap, b, bp: b - ap),
}

_SNR_BY_ROW = {Row.BELOW: SnrClass.DIVERGES, Row.EQUAL: SnrClass.CONSTANT_C, Row.ABOVE: SnrClass.VANISHES_TO_ZERO}


def classify_regime(r: RegimeInput) -> RegimeVerdict:
    """Read the limiting-law cell for power-law moments off the nine-regime table.

    The row compares ``b`` with ``1/2 + b'`` (denominator signal vs noise),
    the column compares ``a + b'`` with ``b + a'``.
    """
    row = {1: Row.ABOVE, 0: Row.EQUAL, -1: Row.BELOW}[_compare([r.b], ["0.5", r.b_prime])]
    col = {-1: Col.LESS, 0: Col.EQUAL, 1: Col.GREATER}[_compare([r.a, r.b_prime], [r.b, r.a_prime])]
    family, exponent = _TABLE[(row, col)]
    a, ap, b, bp = (_as_float(v) for v in (r.a, r.a_prime, r.b, r.b_prime))
    return RegimeVerdict(
        snr_class=_SNR_BY_ROW[row],
        row=row,
        col=col,
        renorm_exponent=exponent(a, ap, b, bp),
        law_family=family,
        delta_method_ok=row is Row.BELOW,
    )
