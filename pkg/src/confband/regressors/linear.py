"""Linear quantile regression by full-batch subgradient descent.

Each quantile level gets its own linear model w, b minimizing the mean
pinball loss. The step size decays as lr / sqrt(1 + t), the standard
schedule under which subgradient descent on a convex piecewise-linear
objective converges. The response is rescaled internally by its mean
absolute value so the step size is decoupled from the data scale; fitted
predictions are returned in original units.
"""

import numpy as np

from ..losses import PinballLoss
from .base import MeanRegressor, QuantileRegressor, as_matrix, as_vector

__all__ = ["LinearPinballModel", "LinearQuantilePair", "LinearMedianRegressor"]


class LinearPinballModel:
    """A single linear model trained on the pinball loss at one level."""

    def __init__(self, alpha: float, epochs: int = 2000, learning_rate: float = 0.5):
        self.pinball = PinballLoss(alpha)
        if epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {epochs}")
        if learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {learning_rate}")
        self.epochs = int(epochs)
        self.learning_rate = float(learning_rate)
        self.coef_: np.ndarray | None = None
        self.intercept_: float | None = None
        self._y_scale: float = 1.0

    def fit(self, X, y) -> "LinearPinballModel":
        X = as_matrix(X)
        y = as_vector(y, X.shape[0])
        n = X.shape[0]
        scale = float(np.mean(np.abs(y)))
        if scale == 0.0:
            scale = 1.0
        ys = y / scale

        w = np.zeros(X.shape[1])
        b = 0.0
        for t in range(self.epochs):
            pred = X @ w + b
            g = self.pinball.subgradient(ys, pred)
            step = self.learning_rate / np.sqrt(1.0 + t)
            w -= step * (X.T @ g) / n
            b -= step * float(np.mean(g))
            if not (np.all(np.isfinite(w)) and np.isfinite(b)):
                raise ValueError("diverged; reduce learning rate")
        self.coef_ = w
        self.intercept_ = b
        self._y_scale = scale
        return self

    def predict(self, X) -> np.ndarray:
        if self.coef_ is None:
            raise RuntimeError("fit() must be called before predict()")
        X = as_matrix(X)
        return (X @ self.coef_ + self.intercept_) * self._y_scale


class LinearQuantilePair(QuantileRegressor):
    """Lower/upper conditional quantile curves, one linear model per level."""

    def __init__(self, epochs: int = 2000, learning_rate: float = 0.5):
        self.epochs = int(epochs)
        self.learning_rate = float(learning_rate)
        self._lo: LinearPinballModel | None = None
        self._hi: LinearPinballModel | None = None

    def fit(self, X, y, alpha_lo: float, alpha_hi: float) -> "LinearQuantilePair":
        if not alpha_lo < alpha_hi:
            raise ValueError(
                f"alpha_lo must be below alpha_hi, got ({alpha_lo}, {alpha_hi})"
            )
        self._lo = LinearPinballModel(alpha_lo, self.epochs, self.learning_rate).fit(X, y)
        self._hi = LinearPinballModel(alpha_hi, self.epochs, self.learning_rate).fit(X, y)
        return self

    def predict_pair(self, X) -> tuple[np.ndarray, np.ndarray]:
        if self._lo is None or self._hi is None:
            raise RuntimeError("fit() must be called before predict_pair()")
        return self._lo.predict(X), self._hi.predict(X)


class LinearMedianRegressor(MeanRegressor):
    """Conditional median as a point predictor (pinball loss at level 0.5)."""

    def __init__(self, epochs: int = 2000, learning_rate: float = 0.5):
        self._model = LinearPinballModel(0.5, epochs, learning_rate)

    def fit(self, X, y) -> "LinearMedianRegressor":
        self._model.fit(X, y)
        return self

    def predict(self, X) -> np.ndarray:
        return self._model.predict(X)
