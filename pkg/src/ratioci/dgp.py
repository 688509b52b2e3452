"""Simulation designs: the distribution families used in the coverage studies.

A :class:`DgpSpec` is a family name plus a flat parameter mapping and an
optional power-law decay ``E[Y_n] = C * n**-b`` of the denominator mean. Every
family reduces to two :class:`Marginal` laws, coupled through a Gaussian
copula when a correlation is given. The copula correlation is the latent
normal correlation; for non-normal marginals the Pearson correlation of the
draws is only approximately equal to it.
"""

from __future__ import annotations

import enum
import functools
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import special

from ratioci.adversarial import (
    DiscreteDist,
    bc_zero_denominator_dist,
    catoni_pair_dist,
    hoeff_zero_denominator_dist,
)
from ratioci.ci_asymptotic import normal_quantile
from ratioci.core import MomentBounds, PairedSample, SupportBounds
from ratioci.rng import generator

# -- marginal laws ------------------------------------------------------------


class Marginal:
    """A univariate law with closed-form mean/variance and a quantile function."""

    def mean(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError

    def quantile(self, p):
        raise NotImplementedError

    def quantile_upper(self, q):
        """Quantile at ``1 - q``; overridden where the upper tail needs care."""
        return self.quantile(1.0 - np.asarray(q, dtype=float))


@dataclass(frozen=True)
class Normal(Marginal):
    mu: float
    var: float

    def mean(self):
        return self.mu

    def variance(self):
        return self.var

    def quantile(self, p):
        if np.ndim(p) == 0:
            return self.mu + math.sqrt(self.var) * normal_quantile(float(p))
        return self.mu + math.sqrt(self.var) * special.ndtri(p)


@dataclass(frozen=True)
class Student(Marginal):
    """``mu + T`` with ``T`` a standard Student variable with ``df > 2`` degrees of freedom."""

    mu: float
    df: float

    def __post_init__(self):
        if not self.df > 2:
            raise ValueError("Student degrees of freedom must exceed 2 for a finite variance")

    def mean(self):
        return self.mu

    def variance(self):
        return self.df / (self.df - 2.0)

    def quantile(self, p):
        return self.mu + special.stdtrit(self.df, p)

    def quantile_upper(self, q):
        return self.mu - special.stdtrit(self.df, q)


@dataclass(frozen=True)
class Exponential(Marginal):
    """Exponential law parameterised by its mean (rate ``1 / mean``)."""

    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("exponential mean must be positive")

    def mean(self):
        return self.mu

    def variance(self):
        return self.mu**2

    def quantile(self, p):
        return -self.mu * np.log1p(-np.asarray(p, dtype=float))

    def quantile_upper(self, q):
        return -self.mu * np.log(q)


@dataclass(frozen=True)
class TranslatedPareto(Marginal):
    """Pareto law with shape ``shape``, shifted to support ``(threshold, inf)`` and mean ``mu``.

    The underlying Pareto has scale ``t = (mu - threshold) * (shape - 1)``
    and is shifted by ``threshold - t``.
    """

    mu: float
    threshold: float
    shape: float

    def __post_init__(self):
        if not self.shape > 2:
            raise ValueError("Pareto shape must exceed 2 for a finite variance")
        if not self.mu > self.threshold:
            raise ValueError("Pareto mean must exceed its threshold")

    @property
    def scale(self) -> float:
        return (self.mu - self.threshold) * (self.shape - 1.0)

    @property
    def shift(self) -> float:
        return self.mu - self.shape * self.scale / (self.shape - 1.0)

    def mean(self):
        return self.mu

    def variance(self):
        g = self.shape
        return self.scale**2 * g / ((g - 1.0) ** 2 * (g - 2.0))

    def quantile(self, p):
        return self.quantile_upper(1.0 - np.asarray(p, dtype=float))

    def quantile_upper(self, q):
        return self.shift + self.scale * np.power(q, -1.0 / self.shape)


@dataclass(frozen=True)
class TranslatedPoisson(Marginal):
    """``P + (mu - var)`` with ``P`` Poisson of parameter ``var``."""

    mu: float
    var: float

    def __post_init__(self):
        if not 0 < self.var <= 50:
            raise ValueError("Poisson parameter must lie in (0, 50]")

    def mean(self):
        return self.mu

    def variance(self):
        return self.var

    @functools.cached_property
    def _cdf(self) -> np.ndarray:
        lam = self.var
        pmf = math.exp(-lam)
        total = pmf
        cdf = [total]
        k = 0
        while 1.0 - total > 1e-17 and k < 10_000:
            k += 1
            pmf *= lam / k
            if pmf == 0.0:
                break
            total += pmf
            cdf.append(total)
        return np.array(cdf)

    def cdf(self, k: int) -> float:
        """``P(P <= k)`` for the untranslated Poisson count ``k``."""
        if k < 0:
            return 0.0
        table = self._cdf
        return float(table[min(k, len(table) - 1)])

    def quantile(self, p):
        # Right-continuous inverse: smallest k with F(k) >= p.
        k = np.searchsorted(self._cdf, p, side="left")
        k = np.minimum(k, len(self._cdf) - 1)
        return k + (self.mu - self.var)


@dataclass(frozen=True)
class Bernoulli(Marginal):
    p: float

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError("Bernoulli p must lie in (0, 1)")

    def mean(self):
        return self.p

    def variance(self):
        return self.p * (1.0 - self.p)

    def quantile(self, u):
        return (np.asarray(u) > 1.0 - self.p).astype(float)


@dataclass(frozen=True)
class Discrete(Marginal):
    dist: DiscreteDist

    def mean(self):
        return self.dist.mean()

    def variance(self):
        return self.dist.variance()

    def quantile(self, p):
        cum = np.cumsum(self.dist.probs)
        cum[-1] = 1.0
        idx = np.minimum(np.searchsorted(cum, p, side="left"), len(cum) - 1)
        return self.dist.values[idx]


def marginal_quantile(marginal: Marginal, p):
    if np.any(np.asarray(p) <= 0) or np.any(np.asarray(p) >= 1):
        raise ValueError("p must lie in (0, 1)")
    return marginal.quantile(p)


# -- specifications ---------------------------------------------------------------


class Family(enum.Enum):
    GAUSSIAN_PRODUCT = "gaussian_product"
    BIVARIATE_GAUSSIAN = "bivariate_gaussian"
    BERNOULLI_PRODUCT = "bernoulli_product"
    STUDENT_COPULA = "student_copula"
    EXPONENTIAL_COPULA = "exponential_copula"
    PARETO_PRODUCT = "pareto_product"
    POISSON_COPULA = "poisson_copula"
    ADVERSARIAL_REF = "adversarial_ref"
    DISCRETE_PRODUCT = "discrete_product"


_REQUIRED = {
    Family.GAUSSIAN_PRODUCT: ("mean_x", "var_x", "mean_y", "var_y"),
    Family.BIVARIATE_GAUSSIAN: ("mean_x", "var_x", "mean_y", "var_y", "corr"),
    Family.BERNOULLI_PRODUCT: ("p_x", "p_y"),
    Family.STUDENT_COPULA: ("mean_x", "df_x", "mean_y", "df_y"),
    Family.EXPONENTIAL_COPULA: ("mean_x", "mean_y"),
    Family.PARETO_PRODUCT: ("mean_x", "threshold_x", "shape_x", "mean_y", "threshold_y", "shape_y"),
    Family.POISSON_COPULA: ("mean_x", "var_x", "mean_y", "var_y"),
    Family.ADVERSARIAL_REF: ("construction",),
    Family.DISCRETE_PRODUCT: ("x_atoms", "y_atoms"),
}

_ADVERSARIAL = ("bc_zero_denominator", "catoni_pair", "hoeff_zero_denominator")


@dataclass(frozen=True)
class Decay:
    """Denominator mean ``c * n**-b``."""

    c: float
    b: float

    def __post_init__(self):
        if self.c == 0 or not math.isfinite(self.c):
            raise ValueError("decay constant must be finite and non-zero")
        if not self.b >= 0:
            raise ValueError("decay exponent must be non-negative")

    def at(self, n: int) -> float:
        return self.c * float(n) ** (-self.b)


@dataclass(frozen=True)
class DgpSpec:
    family: Family
    params: dict[str, Any] = field(default_factory=dict)
    decay: Decay | None = None
    name: str | None = None

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        optional = ("mean_y", "p_y") if self.decay is not None else ()
        missing = [k for k in _REQUIRED[family] if k not in self.params and k not in optional]
        if missing:
            raise ValueError(f"{family.value} needs parameters {missing}")
        corr = self.params.get("corr", 0.0)
        if not -1.0 < corr < 1.0:
            raise ValueError("copula correlation must lie strictly between -1 and 1")
        if self.decay is not None and family in (Family.ADVERSARIAL_REF, Family.DISCRETE_PRODUCT):
            raise ValueError(f"decay is not supported for {family.value}")
        if family is Family.ADVERSARIAL_REF and self.params["construction"] not in _ADVERSARIAL:
            raise ValueError(f"unknown construction {self.params['construction']!r}")
        # Build once at n = 1 (or the construction's own minimum) to validate parameters.
        self.marginals(_validation_n(self))

    @property
    def corr(self) -> float:
        return float(self.params.get("corr", 0.0))

    def mean_y_at(self, n: int) -> float | None:
        return None if self.decay is None else self.decay.at(n)

    def marginals(self, n: int) -> tuple[Marginal, Marginal]:
        p = self.params
        ey = self.mean_y_at(n)
        fam = self.family
        if fam in (Family.GAUSSIAN_PRODUCT, Family.BIVARIATE_GAUSSIAN):
            return Normal(p["mean_x"], p["var_x"]), Normal(p["mean_y"] if ey is None else ey, p["var_y"])
        if fam is Family.BERNOULLI_PRODUCT:
            return Bernoulli(p["p_x"]), Bernoulli(p["p_y"] if ey is None else ey)
        if fam is Family.STUDENT_COPULA:
            return Student(p["mean_x"], p["df_x"]), Student(p["mean_y"] if ey is None else ey, p["df_y"])
        if fam is Family.EXPONENTIAL_COPULA:
            return Exponential(p["mean_x"]), Exponential(p["mean_y"] if ey is None else ey)
        if fam is Family.PARETO_PRODUCT:
            return (
                TranslatedPareto(p["mean_x"], p["threshold_x"], p["shape_x"]),
                TranslatedPareto(p["mean_y"] if ey is None else ey, p["threshold_y"], p["shape_y"]),
            )
        if fam is Family.POISSON_COPULA:
            return (
                TranslatedPoisson(p["mean_x"], p["var_x"]),
                TranslatedPoisson(p["mean_y"] if ey is None else ey, p["var_y"]),
            )
        if fam is Family.DISCRETE_PRODUCT:
            return Discrete(_dist(p["x_atoms"])), Discrete(_dist(p["y_atoms"]))
        x_dist, y_dist = _adversarial_dists(p, n)
        return Discrete(x_dist), Discrete(y_dist)

    @property
    def uses_copula(self) -> bool:
        return self.family in (Family.STUDENT_COPULA, Family.EXPONENTIAL_COPULA, Family.POISSON_COPULA)

    def label(self) -> str:
        if self.name:
            return self.name
        parts = [f"{k}={_fmt(v)}" for k, v in sorted(self.params.items())]
        if self.decay is not None:
            parts.append(f"decay={_fmt(self.decay.c)}*n^-{_fmt(self.decay.b)}")
        return f"{self.family.value}[{';'.join(parts)}]"

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family.value, "params": dict(self.params)}
        if self.decay is not None:
            out["decay"] = {"C": self.decay.c, "b": self.decay.b}
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> DgpSpec:
        decay = d.get("decay")
        return cls(
            family=Family(d["family"]),
            params=dict(d.get("params", {})),
            decay=None if decay is None else Decay(float(decay["C"]), float(decay["b"])),
            name=d.get("name"),
        )

    def cache_key(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:g}"
    if isinstance(v, (list, tuple)):
        return "(" + " ".join(_fmt(x) for x in v) + ")"
    return str(v)


def _dist(atoms) -> DiscreteDist:
    return DiscreteDist(tuple((float(v), float(p)) for v, p in atoms))


def _validation_n(spec: DgpSpec) -> int:
    if spec.family is Family.ADVERSARIAL_REF and spec.params["construction"] == "catoni_pair":
        return int(spec.params.get("validate_n", 7))
    return 1


def _adversarial_dists(p: dict[str, Any], n: int) -> tuple[DiscreteDist, DiscreteDist]:
    kind = p["construction"]
    if kind == "bc_zero_denominator":
        mb = MomentBounds(p["l_y"], p["u_x"], p["u_y"])
        y_dist, _ = bc_zero_denominator_dist(n, mb, p["xi"])
        return DiscreteDist(((math.sqrt(mb.u_x), 1.0),)), y_dist
    if kind == "catoni_pair":
        mb = MomentBounds(p["l_y"], p["u_x"], p["u_y"])
        x_dist, y_dist, _ = catoni_pair_dist(n, p["alpha"], mb)
        return x_dist, y_dist
    sb = SupportBounds(p["a_x"], p["b_x"], p["a_y"], p["b_y"], p["l_y"])
    y_dist, x_dist, _ = hoeff_zero_denominator_dist(n, sb, p["xi"])
    return x_dist, y_dist


# -- sampling -------------------------------------------------------------------


def draw_sample(spec: DgpSpec, n: int, seed: int) -> PairedSample:
    """``n`` i.i.d. pairs from ``spec`` at sample size ``n``; deterministic in ``seed``."""
    xs, ys = _draw_arrays(spec, n, generator(seed))
    return PairedSample(xs, ys)


def _draw_arrays(spec: DgpSpec, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    mx, my = spec.marginals(n)
    fam = spec.family
    if fam in (Family.GAUSSIAN_PRODUCT, Family.BIVARIATE_GAUSSIAN):
        z = rng.standard_normal((2, n))
        rho = spec.corr if fam is Family.BIVARIATE_GAUSSIAN else 0.0
        zy = rho * z[0] + math.sqrt(1.0 - rho * rho) * z[1]
        return mx.mu + math.sqrt(mx.var) * z[0], my.mu + math.sqrt(my.var) * zy
    if fam is Family.PARETO_PRODUCT:
        # Upper-tail uniforms in (0, 1] avoid the pole of the inverse CDF.
        q = 1.0 - rng.random((2, n))
        return mx.quantile_upper(q[0]), my.quantile_upper(q[1])
    if spec.uses_copula:
        z = rng.standard_normal((2, n))
        rho = spec.corr
        zy = rho * z[0] + math.sqrt(1.0 - rho * rho) * z[1]
        # Map through the upper tail so that large normals keep full precision.
        qx = special.ndtr(-z[0])
        qy = special.ndtr(-zy)
        return _upper(mx, qx), _upper(my, qy)
    u = rng.random((2, n))
    return mx.quantile(u[0]), my.quantile(u[1])


def _upper(m: Marginal, q: np.ndarray) -> np.ndarray:
    if isinstance(m, TranslatedPoisson):
        return m.quantile(1.0 - q)
    return m.quantile_upper(q)


# -- true moments -------------------------------------------------------------------


@dataclass(frozen=True)
class TrueRatio:
    theta: float
    e_x: float
    e_y: float
    v_x: float
    v_y: float
    cov: float
    cov_exact: bool = True


_COV_DRAWS = 10_000_000
_COV_CHUNK = 1_000_000


@functools.lru_cache(maxsize=256)
def _copula_cov(key: str, n: int) -> float:
    spec = DgpSpec.from_dict(json.loads(key))
    rng = generator(0x5EED, n)
    total = 0.0
    mx, my = spec.marginals(n)
    for _ in range(_COV_DRAWS // _COV_CHUNK):
        xs, ys = _draw_arrays(spec, _COV_CHUNK, rng)
        total += float(np.dot(xs - mx.mean(), ys - my.mean()))
    return total / _COV_DRAWS


def true_theta(spec: DgpSpec, n: int) -> float:
    mx, my = spec.marginals(n)
    return mx.mean() / my.mean()


def true_ratio(spec: DgpSpec, n: int) -> TrueRatio:
    """Analytic moments at sample size ``n``.

    The covariance of a correlated copula family has no closed form; it is
    estimated once from 10**7 draws, cached, and flagged with ``cov_exact=False``.
    """
    mx, my = spec.marginals(n)
    e_x, e_y = mx.mean(), my.mean()
    if e_y == 0:
        raise ValueError("the denominator mean is zero at this n")
    v_x, v_y = mx.variance(), my.variance()
    if spec.family is Family.BIVARIATE_GAUSSIAN:
        cov, exact = spec.corr * math.sqrt(v_x * v_y), True
    elif spec.uses_copula and spec.corr != 0.0:
        cov, exact = _copula_cov(spec.cache_key(), n), False
    else:
        cov, exact = 0.0, True
    return TrueRatio(e_x / e_y, e_x, e_y, v_x, v_y, cov, exact)
