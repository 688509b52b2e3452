"""Monte Carlo estimation of pointwise coverage ``P(C_n ∋ θ)``.

Repetition ``r`` at sample size ``n`` draws its data from the stream
``(seed, n, r, TAG_SAMPLE)`` and, for resampling methods, its resamples from
``(seed, n, r, TAG_BOOTSTRAP)``. Every method evaluated with the same master
seed therefore sees the same datasets, and results do not depend on how the
repetitions are split between workers.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from ratioci.ci_asymptotic import delta_ci
from ratioci.ci_bootstrap import BootstrapConfig, UndefinedPolicy, bootstrap_ci
from ratioci.ci_nonasymptotic import Method, build_nonasymptotic_ci, halfwidth
from ratioci.core import Interval, Membership, MomentBounds, PairedSample, SupportBounds
from ratioci.dgp import DgpSpec, draw_sample, true_ratio
from ratioci.rng import TAG_BOOTSTRAP, TAG_SAMPLE, derive_seed

# -- method handles ------------------------------------------------------------


class CiMethod(Protocol):
    method_id: str

    def feasible(self, n: int, alpha: float) -> bool: ...

    def interval(self, s: PairedSample, alpha: float, seed: int) -> Interval: ...


@dataclass(frozen=True)
class DeltaMethod:
    method_id: str = "delta"

    def feasible(self, n: int, alpha: float) -> bool:
        return True

    def interval(self, s: PairedSample, alpha: float, seed: int) -> Interval:
        return delta_ci(s, alpha).interval


@dataclass(frozen=True)
class BootstrapMethod:
    b_reps: int = 2000
    policy: UndefinedPolicy = UndefinedPolicy.DROP_AND_RECORD

    @property
    def method_id(self) -> str:
        return f"bootstrap_B{self.b_reps}"

    def feasible(self, n: int, alpha: float) -> bool:
        return True

    def interval(self, s: PairedSample, alpha: float, seed: int) -> Interval:
        cfg = BootstrapConfig(b_reps=self.b_reps, seed=seed, undefined_policy=self.policy)
        return bootstrap_ci(s, alpha, cfg).interval


@dataclass(frozen=True)
class NonasymptoticMethod:
    method: Method
    bounds: MomentBounds | SupportBounds

    @property
    def method_id(self) -> str:
        return self.method.value

    def feasible(self, n: int, alpha: float) -> bool:
        return math.isfinite(halfwidth(self.method, n, alpha, self.bounds))

    def interval(self, s: PairedSample, alpha: float, seed: int) -> Interval:
        return build_nonasymptotic_ci(s, alpha, self.method, self.bounds).interval


# -- reports ---------------------------------------------------------------------


class CountingMode(enum.Enum):
    UNDEFINED_AS_MISS = "undefined_as_miss"
    CONDITIONAL_ON_DEFINED = "conditional_on_defined"


@dataclass(frozen=True)
class Tally:
    hits: int = 0
    misses: int = 0
    undefined: int = 0

    def __add__(self, other: Tally) -> Tally:
        return Tally(self.hits + other.hits, self.misses + other.misses, self.undefined + other.undefined)

    @property
    def total(self) -> int:
        return self.hits + self.misses + self.undefined


@dataclass(frozen=True)
class CoverageReport:
    """Coverage at one ``(spec, n, alpha, method)`` cell.

    ``coverage``, ``undefined_rate`` and ``mc_se`` are ``None`` when the
    method is infeasible at ``(n, alpha)`` (nothing was scored) or when no
    repetition produced a defined interval under conditional counting.
    """

    coverage: float | None
    undefined_rate: float | None
    mc_se: float | None
    reps: int
    reps_defined: int
    counting_mode: CountingMode
    method_id: str
    spec_id: str
    n: int
    alpha: float
    seed: int
    feasible: bool = True
    tally: Tally = field(default_factory=Tally)

    @property
    def miss_rate(self) -> float | None:
        if not self.feasible or self.reps == 0:
            return None
        return self.tally.misses / self.reps


def _report(tally: Tally, mode: CountingMode, **meta) -> CoverageReport:
    reps = tally.total
    defined = tally.hits + tally.misses
    denom = reps if mode is CountingMode.UNDEFINED_AS_MISS else defined
    if denom == 0:
        cov = se = None
    else:
        cov = tally.hits / denom
        se = math.sqrt(cov * (1.0 - cov) / denom)
    und = tally.undefined / reps if reps else None
    return CoverageReport(cov, und, se, reps, defined, mode, tally=tally, **meta)


def worker_count() -> int:
    env = os.environ.get("RATIO_CI_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"RATIO_CI_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _chunks(reps: int, workers: int) -> list[range]:
    n_chunks = min(reps, max(1, workers) * 4)
    edges = np.linspace(0, reps, n_chunks + 1).astype(int)
    return [range(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _run_reps(spec, n, alpha, method, seed, theta, reps_range) -> Tally:
    hits = misses = undefined = 0
    for r in reps_range:
        s = draw_sample(spec, n, derive_seed(seed, n, r, TAG_SAMPLE))
        ci = method.interval(s, alpha, derive_seed(seed, n, r, TAG_BOOTSTRAP))
        m = ci.contains(theta)
        if m is Membership.INSIDE:
            hits += 1
        elif m is Membership.OUTSIDE:
            misses += 1
        else:
            undefined += 1
    return Tally(hits, misses, undefined)


def estimate_coverage(
    spec: DgpSpec,
    n: int,
    alpha: float,
    method: CiMethod,
    reps: int,
    seed: int,
    mode: CountingMode = CountingMode.UNDEFINED_AS_MISS,
    workers: int | None = None,
) -> CoverageReport:
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if n < 1:
        raise ValueError("n must be at least 1")
    meta = dict(method_id=method.method_id, spec_id=spec.label(), n=n, alpha=alpha, seed=seed)
    if not method.feasible(n, alpha):
        return CoverageReport(None, None, None, reps, 0, mode, feasible=False, **meta)
    theta = true_ratio(spec, n).theta
    workers = worker_count() if workers is None else workers
    parts = _chunks(reps, workers)
    if workers <= 1 or len(parts) == 1:
        tallies = [_run_reps(spec, n, alpha, method, seed, theta, p) for p in parts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(lambda p: _run_reps(spec, n, alpha, method, seed, theta, p), parts))
    total = sum(tallies, Tally())
    return _report(total, mode, **meta)


def coverage_curve(
    spec: DgpSpec,
    n_grid: Sequence[int],
    alpha: float,
    method: CiMethod,
    reps: int,
    seed: int,
    mode: CountingMode = CountingMode.UNDEFINED_AS_MISS,
    workers: int | None = None,
) -> list[CoverageReport]:
    # Grid points get independent streams because n is part of every stream path.
    return [estimate_coverage(spec, n, alpha, method, reps, seed, mode, workers) for n in n_grid]


@dataclass(frozen=True)
class RenormalizedSample:
    values: np.ndarray
    dropped: int


def renormalized_statistic_sample(
    spec: DgpSpec, n: int, reps: int, seed: int, renorm_exponent: float
) -> RenormalizedSample:
    """Draws of ``n**-e * sqrt(n) * (Xbar/Ybar - θ_n)``; repetitions with ``Ybar = 0`` are dropped."""
    theta = true_ratio(spec, n).theta
    scale = math.sqrt(n) * float(n) ** (-renorm_exponent)
    out = []
    dropped = 0
    for r in range(reps):
        s = draw_sample(spec, n, derive_seed(seed, n, r, TAG_SAMPLE))
        sy = float(s.ys.sum())
        if sy == 0.0:
            dropped += 1
            continue
        out.append(scale * (float(s.xs.sum()) / sy - theta))
    return RenormalizedSample(np.array(out, dtype=float), dropped)
