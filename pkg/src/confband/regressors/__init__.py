"""Self-contained regression engines used to build prediction bands."""

from .base import (
    ConstantDispersion,
    DispersionRegressor,
    MeanRegressor,
    NonNegativeDispersion,
    QuantileRegressor,
    as_matrix,
    as_vector,
)
from .forest import ForestConfig, ForestMeanRegressor, QuantileForestRegressor
from .knn import KnnDispersion
from .linear import LinearMedianRegressor, LinearPinballModel, LinearQuantilePair
from .mlp import (
    MlpConfig,
    MlpMeanRegressor,
    MlpNetwork,
    MlpQuantilePair,
    fit_mlp_mean,
    fit_mlp_quantiles,
)
from .ridge import DEFAULT_L2_GRID, RidgeRegressor, cross_validate_l2

__all__ = [
    "MeanRegressor",
    "QuantileRegressor",
    "DispersionRegressor",
    "ConstantDispersion",
    "NonNegativeDispersion",
    "as_matrix",
    "as_vector",
    "RidgeRegressor",
    "cross_validate_l2",
    "DEFAULT_L2_GRID",
    "KnnDispersion",
    "LinearPinballModel",
    "LinearQuantilePair",
    "LinearMedianRegressor",
    "MlpConfig",
    "MlpNetwork",
    "MlpMeanRegressor",
    "MlpQuantilePair",
    "fit_mlp_mean",
    "fit_mlp_quantiles",
    "ForestConfig",
    "QuantileForestRegressor",
    "ForestMeanRegressor",
]
