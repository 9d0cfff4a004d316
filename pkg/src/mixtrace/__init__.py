"""Numerical verification of trace and extension inequalities on weighted half-spaces."""

from .errors import ConfigError, DomainError, MixtraceError, NumericError
from .exponents import ExponentConfig, smoothness_order
from .families import FunctionHandle, family_instantiate, instantiate
from .harness import CheckKind, ell_independence_check, refinement_study, run_campaign
from .hardy import HardyParams, hardy_check, hardy_polar_check
from .norms import (
    BesovVariant,
    besov_norm,
    besov_seminorm,
    mixed_lebesgue_norm,
    modulus,
    sobolev_norm,
    weighted_mixed_norm,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_box, integrate_polar, integrate_weighted_vertical
from .reports import ComparisonReport
from .smoothing import PARTITION, extend, extension_limit_profile, mollify, trace_restrict

__all__ = [
    "BesovVariant", "CheckKind", "ComparisonReport", "ConfigError", "DEFAULT_SPEC", "DomainError",
    "ExponentConfig", "FunctionHandle", "HardyParams", "MixtraceError", "NumericError", "PARTITION",
    "QuadratureSpec", "besov_norm", "besov_seminorm", "ell_independence_check", "extend",
    "extension_limit_profile", "family_instantiate", "hardy_check", "hardy_polar_check",
    "instantiate", "integrate_box", "integrate_polar", "integrate_weighted_vertical",
    "mixed_lebesgue_norm", "modulus", "mollify", "refinement_study", "run_campaign",
    "smoothness_order", "sobolev_norm", "trace_restrict", "weighted_mixed_norm",
]
