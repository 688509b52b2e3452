"""Worst-case distributions behind the impossibility results.

Each constructor checks the moment identities its construction relies on
(at 1e-10 relative tolerance) before returning, so a transcription error
fails loudly at build time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ratioci.core import MomentBounds, SupportBounds
from ratioci.rng import generator

_RTOL = 1e-10


@dataclass(frozen=True)
class DiscreteDist:
    """Finitely supported law given as ``((value, prob), ...)`` with distinct values."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple((float(v), float(p)) for v, p in self.atoms)
        if not atoms:
            raise ValueError("need at least one atom")
        values = [v for v, _ in atoms]
        if len(set(values)) != len(values):
            raise ValueError("atom values must be distinct")
        if any(not p > 0 for _, p in atoms):
            raise ValueError("atom probabilities must be positive")
        if abs(math.fsum(p for _, p in atoms) - 1.0) > 1e-12:
            raise ValueError("atom probabilities must sum to 1")
        object.__setattr__(self, "atoms", atoms)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.atoms])

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])

    def mean(self) -> float:
        return math.fsum(v * p for v, p in self.atoms)

    def second_moment(self) -> float:
        return math.fsum(v * v * p for v, p in self.atoms)

    def variance(self) -> float:
        return self.second_moment() - self.mean() ** 2

    def mass_at(self, value: float) -> float:
        return sum(p for v, p in self.atoms if v == value)


def _assert_close(actual: float, expected: float, what: str) -> None:
    if not math.isclose(actual, expected, rel_tol=_RTOL, abs_tol=_RTOL * 1e-3):
        raise AssertionError(f"{what}: constructed {actual!r}, expected {expected!r}")


def sample_discrete(d: DiscreteDist, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. draws by inverting the cumulative atom masses."""
    cum = np.cumsum(d.probs)
    cum[-1] = 1.0
    u = generator(seed).random(n)
    return d.values[np.searchsorted(cum, u, side="right")]


def _three_point(mass0: float, low: float, high: float) -> DiscreteDist:
    side = 0.5 * (1.0 - mass0)
    return DiscreteDist(((0.0, mass0), (low, side), (high, side)))


def bc_xi_upper(mb: MomentBounds) -> float:
    return min(1.0, mb.u_y / mb.l_y**2 - 1.0)


def bc_zero_denominator_dist(n: int, mb: MomentBounds, xi: float) -> tuple[DiscreteDist, float]:
    """Denominator law with E[Y] = l_y, E[Y^2] = u_y and a large P(mean(Y) = 0).

    Returns the law and the exact ``P(mean of n draws == 0)``, which is
    ``(1 - (1 + xi) l_y**2 / u_y)**n``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < xi < bc_xi_upper(mb):
        raise ValueError(f"xi must lie in (0, {bc_xi_upper(mb)})")
    mass0 = 1.0 - mb.l_y**2 * (1.0 + xi) / mb.u_y
    root = math.sqrt(xi)
    dist = _three_point(mass0, mb.l_y * (1 - root) / (1 - mass0), mb.l_y * (1 + root) / (1 - mass0))
    _assert_close(dist.mean(), mb.l_y, "E[Y]")
    _assert_close(dist.second_moment(), mb.u_y, "E[Y^2]")
    return dist, mass0**n


def bc_zero_denominator_supremum(n: int, mb: MomentBounds, grid_points: int = 200) -> float:
    """Largest exact ``P(mean(Y) = 0)`` over a geometric xi-grid shrinking towards 0.

    The supremum over the open xi-interval equals the zero-denominator floor
    of the class but is not attained; the grid value stays strictly below it.
    """
    hi = bc_xi_upper(mb)
    grid = np.geomspace(hi / 2.0, hi * 1e-12, grid_points)
    return max(bc_zero_denominator_dist(n, mb, float(xi))[1] for xi in grid)


def catoni_pair_dist(n: int, alpha: float, mb: MomentBounds) -> tuple[DiscreteDist, DiscreteDist, float]:
    """Numerator and denominator laws making short centred intervals undercover.

    The numerator is symmetric on ``{-n eta, 0, n eta}`` with variance ``u_x``;
    the denominator is a two-point law with mean ``l_y`` and second moment
    ``u_y``. Under their product, the estimate deviates from the truth by more
    than ``xi * eta`` with probability above ``alpha`` for any ``xi < 1``.
    """
    spread = mb.l_y + math.sqrt(mb.excess_y)
    if n < 7:
        raise ValueError("needs n >= 7")
    if not 0.0 < alpha < min(1.0, n / spread**2):
        raise ValueError(f"alpha must lie in (0, {min(1.0, n / spread ** 2)})")
    v = mb.u_x / spread**2
    eta = math.sqrt(v / (3.0 * n * alpha))
    if not eta > math.sqrt(mb.u_x) / n:
        raise ValueError("alpha too large: eta must exceed sqrt(u_x)/n")
    tail = mb.u_x / (2.0 * n**2 * eta**2)
    x_dist = DiscreteDist(((-n * eta, tail), (0.0, 1.0 - 2.0 * tail), (n * eta, tail)))
    s = math.sqrt(mb.excess_y)
    if s == 0.0:
        y_dist = DiscreteDist(((mb.l_y, 1.0),))
    else:
        y_dist = DiscreteDist(((mb.l_y - s, 0.5), (mb.l_y + s, 0.5)))
    if abs(x_dist.mean()) > _RTOL * n * eta:
        raise AssertionError(f"E[X]: constructed {x_dist.mean()!r}, expected 0")
    _assert_close(x_dist.variance(), mb.u_x, "Var[X]")
    _assert_close(y_dist.mean(), mb.l_y, "E[Y]")
    _assert_close(y_dist.second_moment(), mb.u_y, "E[Y^2]")
    return x_dist, y_dist, eta


def hoeff_xi_upper(sb: SupportBounds) -> float:
    return min(1.0, sb.range_y / sb.l_y - 1.0)


def hoeff_zero_denominator_dist(n: int, sb: SupportBounds, xi: float) -> tuple[DiscreteDist, DiscreteDist, float]:
    """Bounded-support analogue of :func:`bc_zero_denominator_dist`.

    Returns ``(Y law, X law, exact P(mean(Y) = 0))``. The largest Y atom equals
    the support length ``b_y - a_y``; X is a fair coin on ``{0, b_x - a_x}``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if sb.range_y <= sb.l_y:
        raise ValueError("needs (b_y - a_y) / l_y > 1")
    if not 0.0 < xi < hoeff_xi_upper(sb):
        raise ValueError(f"xi must lie in (0, {hoeff_xi_upper(sb)})")
    mass0 = 1.0 - sb.l_y * (1.0 + xi) / sb.range_y
    y_dist = _three_point(mass0, sb.l_y * (1 - xi) / (1 - mass0), sb.l_y * (1 + xi) / (1 - mass0))
    x_dist = DiscreteDist(((0.0, 0.5), (sb.range_x, 0.5)))
    _assert_close(y_dist.mean(), sb.l_y, "E[Y]")
    _assert_close(max(y_dist.values), sb.range_y, "largest Y atom")
    _assert_close(x_dist.mean(), sb.range_x / 2.0, "E[X]")
    return y_dist, x_dist, mass0**n

