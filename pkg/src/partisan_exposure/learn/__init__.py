"""Regularized regression, gradient boosting and Shapley explanations."""

from .linear import (
    DEFAULT_ALPHAS,
    DEFAULT_L1_RATIOS,
    ElasticNetFit,
    GridSearchResult,
    cv_grid_search,
    fit_elastic_net,
    kfold_indices,
    train_test_split,
)
from .shapley import ShapExplanation, mean_abs_shap, shapley_values
from .trees import GbmModel, RegressionTree, fit_gbm

__all__ = [
    "DEFAULT_ALPHAS",
    "DEFAULT_L1_RATIOS",
    "ElasticNetFit",
    "GbmModel",
    "GridSearchResult",
    "RegressionTree",
    "ShapExplanation",
    "cv_grid_search",
    "fit_elastic_net",
    "fit_gbm",
    "kfold_indices",
    "mean_abs_shap",
    "shapley_values",
    "train_test_split",
]
