"""Feature grouping and sparse principal component analysis."""

from .core import (
    FgspcaConfig,
    FgspcaResult,
    fit,
    fit_nn,
    fit_spca,
    pca,
    procrustes_rotation,
    simple_thresholding,
)
from .datasets import (
    DatasetInput,
    hidden_factors_covariance,
    hidden_groups_covariance,
    load_csv,
    pitprops,
    sample_hidden_factors,
)
from .errors import DataError, DivergenceError, FgspcaError, InvalidInputError, NotPSDError
from .solver import FgsProblem, SolverControls, solve
from .variance import VarianceReport, adjusted_variance, count_groups, count_nonzeros, variance_report

__version__ = "0.1.0"

__all__ = [
    "DataError", "DatasetInput", "DivergenceError", "FgsProblem", "FgspcaConfig", "FgspcaError",
    "FgspcaResult", "InvalidInputError", "NotPSDError", "SolverControls", "VarianceReport",
    "adjusted_variance", "count_groups", "count_nonzeros", "fit", "fit_nn", "fit_spca",
    "hidden_factors_covariance", "hidden_groups_covariance", "load_csv", "pca", "pitprops",
    "procrustes_rotation", "sample_hidden_factors", "simple_thresholding", "solve", "variance_report",
]
