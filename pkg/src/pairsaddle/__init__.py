"""Pairwise-likelihood hypothesis tests with saddlepoint calibration.

The package provides pairwise (composite) likelihood models for
equicorrelated row samples, robust first-order autoregressions, and
block-paired random fields; sandwich-based classical test statistics with
eigenvalue adjustments; a nonparametric saddlepoint statistic on tilted
per-unit scores with an optional tilted bootstrap; and a deterministic
Monte Carlo harness with delimited reports and rendered figures.
"""

from .classic import (
    EigenAdjustment,
    MCPValue,
    TestOutcome,
    classic_test,
    kappa_factors,
    linear_chisq_pvalue,
    stat_cb,
    stat_inv,
    stat_moment,
    stat_pl_ratio,
    stat_score,
    stat_wald,
)
from .dataio import load_dataset, store_dataset
from .errors import (
    BootstrapUnstable,
    ConfigError,
    DegenerateScores,
    DomainError,
    ExperimentUnstable,
    HullViolation,
    NoConvergence,
    NotPositiveDefinite,
    PairsaddleError,
    ParseError,
    SingularJacobian,
)
from .experiments import (
    CoverageReport,
    CoverageRow,
    ExperimentConfig,
    QQTable,
    RegionTable,
    SizeTable,
    coverage_csv,
    emit_qq_data,
    emit_size_and_relerr,
    evaluate_region,
    qq_csv,
    region_csv,
    run_coverage,
    size_csv,
)
from .figures import render_coverage, render_qq, render_region, render_size
from .inference import (
    FitResult,
    GodambeMatrices,
    empirical_h,
    empirical_j,
    expected_matrices_mc,
    fit_mple,
    godambe_matrices,
    godambe_v,
)
from .models import (
    Ar1Model,
    Ar1Params,
    ContaminationSpec,
    FixedParamsModel,
    GeoParams,
    GeostatModel,
    GradientView,
    MvnModel,
    MvnParams,
    RobustTuning,
    ScoreModel,
    default_block_side,
)
from .numerics import RngStream, chisq_quantile, chisq_tail
from .saddlepoint import (
    SaddleSolution,
    TiltSolution,
    bootstrap_pw_sp,
    solve_saddle,
    solve_tilt,
    stat_pw_sp,
)

__version__ = "0.1.0"

__all__ = [
    "Ar1Model",
    "Ar1Params",
    "BootstrapUnstable",
    "ConfigError",
    "ContaminationSpec",
    "CoverageReport",
    "CoverageRow",
    "DegenerateScores",
    "DomainError",
    "EigenAdjustment",
    "ExperimentConfig",
    "ExperimentUnstable",
    "FitResult",
    "FixedParamsModel",
    "GeoParams",
    "GeostatModel",
    "GodambeMatrices",
    "GradientView",
    "HullViolation",
    "MCPValue",
    "MvnModel",
    "MvnParams",
    "NoConvergence",
    "NotPositiveDefinite",
    "PairsaddleError",
    "ParseError",
    "QQTable",
    "RegionTable",
    "RngStream",
    "RobustTuning",
    "SaddleSolution",
    "ScoreModel",
    "SingularJacobian",
    "SizeTable",
    "TestOutcome",
    "TiltSolution",
    "bootstrap_pw_sp",
    "chisq_quantile",
    "chisq_tail",
    "classic_test",
    "coverage_csv",
    "default_block_side",
    "emit_qq_data",
    "emit_size_and_relerr",
    "empirical_h",
    "empirical_j",
    "evaluate_region",
    "expected_matrices_mc",
    "fit_mple",
    "godambe_matrices",
    "godambe_v",
    "kappa_factors",
    "linear_chisq_pvalue",
    "load_dataset",
    "qq_csv",
    "region_csv",
    "render_coverage",
    "render_qq",
    "render_region",
    "render_size",
    "run_coverage",
    "size_csv",
    "solve_saddle",
    "solve_tilt",
    "stat_cb",
    "stat_inv",
    "stat_moment",
    "stat_pl_ratio",
    "stat_pw_sp",
    "stat_score",
    "stat_wald",
    "store_dataset",
    "__version__",
]
