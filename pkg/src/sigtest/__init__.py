"""Significance tests for variables entering lasso and stepwise regression paths."""

from .exceptions import (
    ConvergenceError,
    DegenerateColumnError,
    DegenerateVarianceError,
    DuplicateColumnError,
    InfeasibleDesignError,
    MissingVarianceError,
    NoEventsError,
    NotEstimableError,
    PathTooShortError,
    PathTruncationWarning,
    SeparationError,
    SigtestError,
    SingularDesignError,
    StalePathError,
    TooFewRemainingError,
    UnreliableMaxError,
    UnsupportedStepError,
)
from .glm import (
    BinaryDataset,
    FitResult,
    SurvivalDataset,
    cox_fit,
    gumbel_test_glm,
    logistic_fit,
    lrt_drop,
)
from .lasso import Knot, LassoPath, kkt_check, lars_path, lasso_solve
from .linmodel import (
    Dataset,
    SubsetFit,
    estimate_sigma2,
    least_squares,
    r_stat,
    r_stats_batch,
    standardize,
)
from .montecarlo import (
    MonteCarloSummary,
    Scenario,
    gen_design,
    gen_response,
    ks_distance,
    preset,
    preset_names,
    qq_points,
    run_scenario,
)
from .selection import SelectionStep, lasso_steps, stepwise_path
from .significance import (
    GumbelRef,
    TestOutcome,
    covariance_test,
    gumbel_cdf,
    gumbel_correction,
    gumbel_quantile,
    gumbel_sf,
    gumbel_test,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryDataset",
    "ConvergenceError",
    "Dataset",
    "DegenerateColumnError",
    "DegenerateVarianceError",
    "DuplicateColumnError",
    "FitResult",
    "GumbelRef",
    "InfeasibleDesignError",
    "Knot",
    "LassoPath",
    "MissingVarianceError",
    "MonteCarloSummary",
    "NoEventsError",
    "NotEstimableError",
    "PathTooShortError",
    "PathTruncationWarning",
    "Scenario",
    "SelectionStep",
    "SeparationError",
    "SigtestError",
    "SingularDesignError",
    "StalePathError",
    "SubsetFit",
    "SurvivalDataset",
    "TestOutcome",
    "TooFewRemainingError",
    "UnreliableMaxError",
    "UnsupportedStepError",
    "covariance_test",
    "cox_fit",
    "estimate_sigma2",
    "gen_design",
    "gen_response",
    "gumbel_cdf",
    "gumbel_correction",
    "gumbel_quantile",
    "gumbel_sf",
    "gumbel_test",
    "gumbel_test_glm",
    "kkt_check",
    "ks_distance",
    "lars_path",
    "lasso_solve",
    "lasso_steps",
    "least_squares",
    "logistic_fit",
    "lrt_drop",
    "preset",
    "preset_names",
    "qq_points",
    "r_stat",
    "r_stats_batch",
    "run_scenario",
    "standardize",
    "stepwise_path",
]
