"""Concrete estimating systems and the shared model interface."""

from .ar1 import (
    Ar1Model,
    Ar1Params,
    ContaminationSpec,
    ar1_full_loglik,
    ar1_full_mle,
    ar1_unit_score,
    pl_ar1,
    simulate_ar1,
)
from .base import FixedParamsModel, GradientView, ScoreModel, total_score, unit_scores
from .geostat import (
    BlockPartition,
    GeoParams,
    GeostatModel,
    GeoUnits,
    block_partition,
    default_block_side,
    exp_cov,
    geo_unit_score,
    pl_geostat,
    simulate_grf,
)
from .mvn import (
    MvnModel,
    MvnParams,
    mvn_full_loglik,
    mvn_full_mle,
    mvn_unit_score,
    pl_mvn,
    simulate_equicorr,
)
from .robust import CLASSICAL, RobustTuning, huber_beta_const, huber_psi

__all__ = [
    "ScoreModel",
    "FixedParamsModel",
    "GradientView",
    "total_score",
    "unit_scores",
    "RobustTuning",
    "CLASSICAL",
    "huber_psi",
    "huber_beta_const",
    "MvnModel",
    "MvnParams",
    "simulate_equicorr",
    "pl_mvn",
    "mvn_unit_score",
    "mvn_full_loglik",
    "mvn_full_mle",
    "Ar1Model",
    "Ar1Params",
    "ContaminationSpec",
    "simulate_ar1",
    "pl_ar1",
    "ar1_unit_score",
    "ar1_full_loglik",
    "ar1_full_mle",
    "GeostatModel",
    "GeoParams",
    "GeoUnits",
    "BlockPartition",
    "block_partition",
    "default_block_side",
    "exp_cov",
    "geo_unit_score",
    "pl_geostat",
    "simulate_grf",
]
