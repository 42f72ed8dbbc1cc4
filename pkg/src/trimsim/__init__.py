"""Similarity testing of univariate samples via optimally trimmed
Wasserstein distances."""

from ._kernels import BACKEND
from .boottest import (
    TestConfig,
    TestResult,
    bootstrap_pvalue,
    calibrated_alpha,
    ks_critical_value,
    ks_similarity_test,
    ks_statistic,
    pooled_measure,
    prop6_bound_check,
    resampling_sizes,
)
from .distmodel import (
    Component,
    DistSpec,
    EmpiricalSample,
    InputError,
    empirical_from_values,
    mixture,
    normal,
    read_sample_file,
    sample,
    uniform,
)
from .rng import SeedSpec
from .similarity import (
    CanonicalDecomposition,
    DegenerateDecomposition,
    GriddedDensity,
    canonical_decomposition,
    contaminated,
    epsilon_for_tv,
    is_similar,
    tv_distance,
)
from .trimming import (
    TrimmingFunction,
    TrimmingSolution,
    brute_force_joint_trim,
    common_trim_distance,
    joint_optimal_trim,
    joint_optimal_trim_dp,
    optimal_trim_to_target,
    trim_with_function,
    trimmed_empirical_process,
)
from .wasserstein import (
    QuantileCurve,
    TabulatedQuantile,
    w2,
    w2_equal_size,
    wp_scalar_laws,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CanonicalDecomposition",
    "Component",
    "DegenerateDecomposition",
    "DistSpec",
    "EmpiricalSample",
    "GriddedDensity",
    "InputError",
    "QuantileCurve",
    "SeedSpec",
    "TabulatedQuantile",
    "TestConfig",
    "TestResult",
    "TrimmingFunction",
    "TrimmingSolution",
    "bootstrap_pvalue",
    "brute_force_joint_trim",
    "calibrated_alpha",
    "canonical_decomposition",
    "common_trim_distance",
    "contaminated",
    "empirical_from_values",
    "epsilon_for_tv",
    "is_similar",
    "joint_optimal_trim",
    "joint_optimal_trim_dp",
    "ks_critical_value",
    "ks_similarity_test",
    "ks_statistic",
    "mixture",
    "normal",
    "optimal_trim_to_target",
    "pooled_measure",
    "prop6_bound_check",
    "read_sample_file",
    "resampling_sizes",
    "sample",
    "trim_with_function",
    "trimmed_empirical_process",
    "tv_distance",
    "uniform",
    "w2",
    "w2_equal_size",
    "wp_scalar_laws",
]
