"""Training losses for the regression engines: pinball and squared error.

The pinball (check) loss at level alpha is

    rho_alpha(y, y_hat) = alpha * (y - y_hat)        if y - y_hat > 0
                          (1 - alpha) * (y_hat - y)  otherwise.

Its population minimizer over constant predictions is the alpha-quantile,
which is what makes it the right objective for quantile regression.
Batch losses are means, not sums, so learning rates do not depend on the
batch size.
"""

from dataclasses import dataclass

import numpy as np

from .quantiles import check_level

__all__ = [
    "PinballLoss",
    "RegularizerSpec",
    "squared_error",
    "squared_error_gradient",
]


@dataclass(frozen=True)
class PinballLoss:
    """Pinball loss pinned at a fixed quantile level.

    Parameters
    ----------
    alpha : float
        Target quantile level, strictly inside (0, 1).
    """

    alpha: float

    def __post_init__(self):
        check_level(self.alpha)

    def loss(self, y, y_hat):
        """Elementwise pinball loss; broadcasts like numpy."""
        y = np.asarray(y, dtype=float)
        y_hat = np.asarray(y_hat, dtype=float)
        diff = y - y_hat
        out = np.where(diff > 0, self.alpha * diff, (self.alpha - 1.0) * diff)
        return float(out) if out.ndim == 0 else out

    def subgradient(self, y, y_hat):
        """Subgradient of the loss with respect to y_hat.

        Returns -alpha where y > y_hat and (1 - alpha) where y < y_hat.
        At the kink y == y_hat the subgradient 0 is chosen, so an exact
        fit is a stationary point.
        """
        y = np.asarray(y, dtype=float)
        y_hat = np.asarray(y_hat, dtype=float)
        out = np.where(
            y > y_hat, -self.alpha, np.where(y < y_hat, 1.0 - self.alpha, 0.0)
        )
        return float(out) if out.ndim == 0 else out

    def mean_loss(self, y, y_hat) -> float:
        return float(np.mean(self.loss(y, y_hat)))


@dataclass(frozen=True)
class RegularizerSpec:
    """An L2 penalty weight; zero disables regularization."""

    l2_weight: float = 0.0

    def __post_init__(self):
        if self.l2_weight < 0:
            raise ValueError(f"l2_weight must be >= 0, got {self.l2_weight}")


def squared_error(y, y_hat):
    """Elementwise squared error (y - y_hat)**2."""
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    out = (y - y_hat) ** 2
    return float(out) if out.ndim == 0 else out


def squared_error_gradient(y, y_hat):
    """Gradient of the squared error with respect to y_hat: 2 (y_hat - y)."""
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    out = 2.0 * (y_hat - y)
    return float(out) if out.ndim == 0 else out
