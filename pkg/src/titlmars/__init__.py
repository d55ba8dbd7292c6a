"""Hinge-basis (truncated-linear MARS) models: fitting, certified global
optimization via a mixed-integer quadratic reformulation and branch-and-bound,
a genetic-algorithm baseline, and a wind-farm surrogate benchmark."""

from .errors import (
    CapacityError,
    FitError,
    ParseError,
    TitlMarsError,
    ValidationError,
    WakeDomainError,
)
from .model import (
    BasisFunction,
    Solution,
    TitlMarsModel,
    TruncatedTerm,
    eval_basis,
    eval_model,
    eval_model_many,
    eval_term,
    knot_grid,
    make_model,
    oracle_optimum,
    parse_model,
    serialize_model,
)
from .fitter import Dataset, FitConfig, fit, load_dataset_csv, make_dataset
from .ga import GaParams, optimize as ga_optimize, preset as ga_preset
from .miqp import MiqpProblem, build_miqp, compute_big_m, embed_point, objective_at
from .solver import BranchAndBound, SolverConfig, solve
from .windfarm import FarmConfig, WindScenario, monte_carlo_power_grid

__version__ = "0.1.0"

__all__ = [
    "BasisFunction",
    "BranchAndBound",
    "CapacityError",
    "Dataset",
    "FarmConfig",
    "FitConfig",
    "FitError",
    "GaParams",
    "MiqpProblem",
    "ParseError",
    "Solution",
    "SolverConfig",
    "TitlMarsError",
    "TitlMarsModel",
    "TruncatedTerm",
    "ValidationError",
    "WakeDomainError",
    "WindScenario",
    "build_miqp",
    "compute_big_m",
    "embed_point",
    "eval_basis",
    "eval_model",
    "eval_model_many",
    "eval_term",
    "fit",
    "ga_optimize",
    "ga_preset",
    "knot_grid",
    "load_dataset_csv",
    "make_dataset",
    "make_model",
    "monte_carlo_power_grid",
    "objective_at",
    "oracle_optimum",
    "parse_model",
    "serialize_model",
    "solve",
]
