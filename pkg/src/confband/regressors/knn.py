"""k-nearest-neighbor dispersion: local mean of absolute residuals."""

import numpy as np
from scipy.spatial.distance import cdist

from .base import DispersionRegressor, as_matrix, as_vector

__all__ = ["KnnDispersion"]


class KnnDispersion(DispersionRegressor):
    """Estimate residual spread at x as the mean absolute residual of the
    k training rows nearest to x in Euclidean distance.

    Parameters
    ----------
    k : int
        Neighborhood size; must not exceed the number of training rows.
    """

    def __init__(self, k: int = 11):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.k = int(k)
        self._X: np.ndarray | None = None
        self._r: np.ndarray | None = None

    def fit(self, X, residuals) -> "KnnDispersion":
        X = as_matrix(X)
        r = as_vector(residuals, X.shape[0])
        if np.any(r < 0):
            raise ValueError("residuals must be non-negative (absolute residuals)")
        if self.k > X.shape[0]:
            raise ValueError(f"k={self.k} exceeds the {X.shape[0]} training rows")
        self._X = X.copy()
        self._r = r.copy()
        return self

    def predict(self, X) -> np.ndarray:
        if self._X is None:
            raise RuntimeError("fit() must be called before predict()")
        X = as_matrix(X)
        dists = cdist(X, self._X)
        if self.k == self._X.shape[0]:
            neighbors = np.broadcast_to(
                np.arange(self._X.shape[0]), (X.shape[0], self._X.shape[0])
            )
        else:
            neighbors = np.argpartition(dists, self.k - 1, axis=1)[:, : self.k]
        return self._r[neighbors].mean(axis=1)
