"""Efron's percentile bootstrap for E[X]/E[Y].

Replicate ``b`` resamples with indices from block ``b`` of a counter-based
stream keyed by the configured seed, so replicates can be produced in any
order or in parallel with identical results.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ratioci.core import UNDEFINED, Interval, PairedSample
from ratioci.rng import block_integers

# Replicates are generated in chunks to bound memory at large n.
_CHUNK_ELEMENTS = 1 << 20


class UndefinedPolicy(enum.Enum):
    DROP_AND_RECORD = "drop_and_record"
    FAIL_UNDEFINED = "fail_undefined"


@dataclass(frozen=True)
class BootstrapConfig:
    b_reps: int = 2000
    seed: int = 0
    undefined_policy: UndefinedPolicy = UndefinedPolicy.DROP_AND_RECORD

    def __post_init__(self):
        if self.b_reps < 2:
            raise ValueError("b_reps must be at least 2")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class BootstrapCiResult:
    interval: Interval
    dropped_reps: int
    b_effective: int


def resample_indices(n: int, seed: int, rep: int) -> np.ndarray:
    """Indices of bootstrap replicate ``rep``: ``n`` uniform draws from ``range(n)``."""
    return block_integers(n, seed, rep, 1)[0]


def replicate_sums(s: PairedSample, seed: int, b_reps: int) -> tuple[np.ndarray, np.ndarray]:
    """Sums of resampled xs and ys for replicates ``0 .. b_reps - 1``."""
    sx = np.empty(b_reps)
    sy = np.empty(b_reps)
    step = max(1, _CHUNK_ELEMENTS // s.n)
    for start in range(0, b_reps, step):
        stop = min(b_reps, start + step)
        idx = block_integers(s.n, seed, start, stop - start)
        sx[start:stop] = s.xs[idx].sum(axis=1)
        sy[start:stop] = s.ys[idx].sum(axis=1)
    return sx, sy


def order_statistic_index(tau: float, b: int) -> int:
    """0-based index of the ceil(tau * b)-th order statistic, clamped to the sample."""
    # Rounding first keeps exact products such as 0.025 * 2000 from ceiling upward.
    k = math.ceil(round(tau * b, 9))
    return min(max(k, 1), b) - 1


def percentile_interval(sorted_stats: np.ndarray, alpha: float) -> Interval:
    b = len(sorted_stats)
    lo = sorted_stats[order_statistic_index(alpha / 2.0, b)]
    hi = sorted_stats[order_statistic_index(1.0 - alpha / 2.0, b)]
    return Interval(float(lo), float(hi))


def min_effective_reps(b_reps: int) -> int:
    return max(2, math.ceil(0.5 * b_reps))


def bootstrap_ci(s: PairedSample, alpha: float, cfg: BootstrapConfig) -> BootstrapCiResult:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if s.denominator_is_zero:
        return BootstrapCiResult(UNDEFINED, 0, 0)
    sx, sy = replicate_sums(s, cfg.seed, cfg.b_reps)
    zero = sy == 0.0
    dropped = int(zero.sum())
    b_eff = cfg.b_reps - dropped
    if dropped and cfg.undefined_policy is UndefinedPolicy.FAIL_UNDEFINED:
        return BootstrapCiResult(UNDEFINED, dropped, b_eff)
    if b_eff < min_effective_reps(cfg.b_reps):
        return BootstrapCiResult(UNDEFINED, dropped, b_eff)
    keep = ~zero
    stats = np.sort(sx[keep] / sy[keep])
    return BootstrapCiResult(percentile_interval(stats, alpha), dropped, b_eff)
