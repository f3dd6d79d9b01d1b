"""Bayesian double machine learning with generalized empirical likelihood."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .dml import DmlEstimate, dml_estimate
from .errors import (
    BdmlError,
    ConfigError,
    DataError,
    DegenerateDesign,
    InfeasibleMoment,
    NonConvergence,
    NumericalError,
)
from .gel import EL, ETEL, HD, DivergenceSpec, log_profile_likelihood, solve_weights
from .posterior import McmcConfig, PosteriorDraws, PriorSpec, run_chain
from .score import (
    NuisanceKind,
    NuisancePredictions,
    ObservationSet,
    ScoreComponents,
    build_score_components,
)

__all__ = [
    "BACKEND",
    "BdmlError",
    "ConfigError",
    "DataError",
    "DegenerateDesign",
    "DivergenceSpec",
    "DmlEstimate",
    "EL",
    "ETEL",
    "HD",
    "InfeasibleMoment",
    "McmcConfig",
    "NonConvergence",
    "NuisanceKind",
    "NuisancePredictions",
    "NumericalError",
    "ObservationSet",
    "PosteriorDraws",
    "PriorSpec",
    "ScoreComponents",
    "build_score_components",
    "dml_estimate",
    "log_profile_likelihood",
    "run_chain",
    "solve_weights",
]
