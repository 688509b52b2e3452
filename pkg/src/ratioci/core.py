"""Domain types shared by every interval constructor.

All second moments use divisor ``n`` (not ``n - 1``): the plug-in variance of
the delta method and the plug-in rule of thumb are both written with
population-style moments, and keeping one convention everywhere makes the two
agree exactly.

A zero denominator mean is a modelled outcome, not an error: ``ratio_estimate``
returns ``None`` and interval constructors return :data:`UNDEFINED`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class Membership(enum.Enum):
    """Outcome of asking whether a value lies in an interval."""

    INSIDE = "inside"
    OUTSIDE = "outside"
    UNDEFINED = "undefined"


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]``, or the undefined interval when both are None."""

    lo: float | None
    hi: float | None

    def __post_init__(self):
        if (self.lo is None) != (self.hi is None):
            raise ValueError("an interval is either fully defined or undefined")
        if self.lo is not None:
            if math.isnan(self.lo) or math.isnan(self.hi):
                raise ValueError("interval endpoints must not be NaN")
            if self.lo > self.hi:
                raise ValueError(f"lo={self.lo} exceeds hi={self.hi}")

    @property
    def defined(self) -> bool:
        return self.lo is not None

    @property
    def width(self) -> float | None:
        return None if self.lo is None else self.hi - self.lo

    def contains(self, value: float) -> Membership:
        if self.lo is None:
            return Membership.UNDEFINED
        return Membership.INSIDE if self.lo <= value <= self.hi else Membership.OUTSIDE

    def __repr__(self) -> str:
        if self.lo is None:
            return "Interval(undefined)"
        return f"Interval({self.lo!r}, {self.hi!r})"


UNDEFINED = Interval(None, None)


@dataclass(frozen=True, eq=False)
class PairedSample:
    """``n`` paired observations ``(x_i, y_i)``; stored as read-only float arrays."""

    xs: np.ndarray
    ys: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float).ravel()
        ys = np.array(self.ys, dtype=float).ravel()
        if xs.shape != ys.shape:
            raise ValueError(f"xs has {xs.size} entries but ys has {ys.size}")
        if xs.size == 0:
            raise ValueError("a sample needs at least one pair")
        if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
            raise ValueError("sample contains NaN or infinite values")
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "n", int(xs.size))

    def __len__(self) -> int:
        return self.n

    @property
    def denominator_is_zero(self) -> bool:
        # Raw sum, tested before any division: discrete designs hit zero exactly.
        return float(self.ys.sum()) == 0.0


@dataclass(frozen=True)
class SampleMoments:
    mean_x: float
    mean_y: float
    var_x: float
    var_y: float
    cov_xy: float
    m2_x: float
    m2_y: float


@dataclass(frozen=True)
class MomentBounds:
    """Class constants of the moment-bounded (Chebyshev) setting.

    ``l_y`` bounds E[Y] from below, ``u_x`` and ``u_y`` bound the raw second
    moments. ``a_y`` is an optional almost-sure lower bound on Y, needed only
    by the well-separated interval.
    """

    l_y: float
    u_x: float
    u_y: float
    a_y: float | None = None

    def __post_init__(self):
        if not self.l_y > 0:
            raise ValueError("l_y must be positive")
        if not (self.u_x > 0 and self.u_y > 0):
            raise ValueError("u_x and u_y must be positive")
        if self.l_y**2 > self.u_y * (1 + 1e-12):
            raise ValueError("l_y**2 > u_y: no distribution satisfies these bounds")
        if self.a_y is not None and not self.a_y > 0:
            raise ValueError("a_y must be positive when given")

    @property
    def excess_y(self) -> float:
        """``u_y - l_y**2``, clipped at zero against rounding."""
        return max(self.u_y - self.l_y**2, 0.0)


@dataclass(frozen=True)
class SupportBounds:
    """Class constants of the bounded-support (Hoeffding) setting."""

    a_x: float
    b_x: float
    a_y: float
    b_y: float
    l_y: float

    def __post_init__(self):
        if not self.a_x < self.b_x:
            raise ValueError("need a_x < b_x")
        if not self.a_y < self.b_y:
            raise ValueError("need a_y < b_y (constant denominators are a plain mean problem)")
        if not self.l_y > 0:
            raise ValueError("l_y must be positive")
        if self.l_y > self.b_y:
            raise ValueError("l_y cannot exceed b_y")

    @property
    def range_x(self) -> float:
        return self.b_x - self.a_x

    @property
    def range_y(self) -> float:
        return self.b_y - self.a_y

    @property
    def max_abs_x(self) -> float:
        return max(abs(self.a_x), abs(self.b_x))


def compute_moments(s: PairedSample) -> SampleMoments:
    n = s.n
    mean_x = float(s.xs.sum()) / n
    mean_y = float(s.ys.sum()) / n
    m2_x = float(np.dot(s.xs, s.xs)) / n
    m2_y = float(np.dot(s.ys, s.ys)) / n
    dx = s.xs - mean_x
    dy = s.ys - mean_y
    var_x = float(np.dot(dx, dx)) / n
    var_y = float(np.dot(dy, dy)) / n
    cov_xy = float(np.dot(dx, dy)) / n
    return SampleMoments(mean_x, mean_y, var_x, var_y, cov_xy, m2_x, m2_y)


def ratio_estimate(s: PairedSample) -> float | None:
    """``mean(xs) / mean(ys)``, or None when the denominator mean is exactly zero."""
    if s.denominator_is_zero:
        return None
    return float(s.xs.sum()) / float(s.ys.sum())
