"""Confidence intervals and coverage audits for ratios of expectations E[X]/E[Y]."""

from ratioci.core import (
    UNDEFINED,
    Interval,
    Membership,
    MomentBounds,
    PairedSample,
    SampleMoments,
    SupportBounds,
    compute_moments,
    ratio_estimate,
)
from ratioci.ci_asymptotic import DeltaCiResult, delta_ci, normal_quantile
from ratioci.ci_bootstrap import BootstrapCiResult, BootstrapConfig, UndefinedPolicy, bootstrap_ci
from ratioci.ci_nonasymptotic import Method, NonasymptoticCi, build_nonasymptotic_ci

__all__ = [
    "UNDEFINED",
    "BootstrapCiResult",
    "BootstrapConfig",
    "DeltaCiResult",
    "Interval",
    "Membership",
    "Method",
    "MomentBounds",
    "NonasymptoticCi",
    "PairedSample",
    "SampleMoments",
    "SupportBounds",
    "UndefinedPolicy",
    "bootstrap_ci",
    "build_nonasymptotic_ci",
    "compute_moments",
    "delta_ci",
    "normal_quantile",
    "ratio_estimate",
]

__version__ = "0.1.0"
