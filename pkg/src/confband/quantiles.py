"""Exact empirical quantiles as order statistics.

All conformal calibration in this package rests on one primitive: the
empirical quantile of a finite sample, computed as an exact order
statistic with no interpolation. Interpolated quantiles would silently
void the finite-sample coverage guarantees, which are proved for the
ceiling-index formula only.

For a sorted sample z_(1) <= ... <= z_(n):

* left empirical quantile at level a:   z_(ceil(a * n))
* right empirical quantile at level a:  z_(floor(a * n) + 1)
* inflated quantile at miscoverage a:   left quantile at (1 - a)(1 + 1/n),
  or +inf when that level exceeds 1 (the calibration set is too small to
  support the guarantee, so the only valid interval is infinite).
"""

import math

import numpy as np

__all__ = ["SortedSample", "check_level"]

# Levels are floats, so products like 0.9 * (n + 1) can land a hair above
# or below an exact integer boundary. Indices snap to the boundary when
# within this relative tolerance; real data never puts a level this close
# to a boundary by accident.
_BOUNDARY_RTOL = 1e-9


def check_level(alpha: float) -> float:
    """Validate a quantile/miscoverage level, returning it as a float.

    Raises ValueError unless 0 < alpha < 1 strictly.
    """
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"level must be in the open interval (0, 1), got {alpha}")
    return alpha


def _snap(x: float) -> float:
    """Snap x to the nearest integer when within floating-point noise of it."""
    nearest = round(x)
    if abs(x - nearest) <= _BOUNDARY_RTOL * max(1.0, abs(x)):
        return float(nearest)
    return x


class SortedSample:
    """An immutable ordered multiset of real scores with order-statistic queries.

    Parameters
    ----------
    values : array-like of shape (n,)
        Real scores; sorted internally. Must be non-empty and finite.
        Ties are permitted.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1:
            arr = arr.reshape(-1)
        if arr.size == 0:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample contains non-finite values")
        arr = np.sort(arr)
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        """The scores in non-decreasing order (read-only view)."""
        return self._values

    @property
    def n(self) -> int:
        return self._values.size

    def __len__(self) -> int:
        return self._values.size

    def __repr__(self) -> str:
        return f"SortedSample(n={self.n}, min={self._values[0]}, max={self._values[-1]})"

    def order_statistic(self, k: int) -> float:
        """Return the k-th smallest value, 1-indexed."""
        if not 1 <= k <= self.n:
            raise ValueError(f"order statistic index must be in [1, {self.n}], got {k}")
        return float(self._values[k - 1])

    def quantile(self, level: float) -> float:
        """Left empirical quantile: the ceil(level * n)-th order statistic."""
        level = check_level(level)
        k = int(math.ceil(_snap(level * self.n)))
        k = max(k, 1)
        return self.order_statistic(k)

    def right_quantile(self, level: float) -> float:
        """Right empirical quantile: the (floor(level * n) + 1)-th order statistic."""
        level = check_level(level)
        k = int(math.floor(_snap(level * self.n))) + 1
        k = min(k, self.n)
        return self.order_statistic(k)

    def inflated_quantile(self, alpha: float) -> float:
        """Calibration quantile at the inflated level (1 - alpha)(1 + 1/n).

        The +1/n inflation accounts for the not-yet-seen test point. When
        the inflated level exceeds 1 the sample is too small to certify
        1 - alpha coverage with any finite value, and +inf is returned.
        """
        alpha = check_level(alpha)
        # (1 - alpha)(1 + 1/n) * n == (1 - alpha)(n + 1); the single-product
        # form keeps exact integer boundaries exact.
        scaled = _snap((1.0 - alpha) * (self.n + 1))
        if scaled > self.n:
            return math.inf
        k = max(int(math.ceil(scaled)), 1)
        return self.order_statistic(k)

    def cdf(self, z):
        """Empirical CDF: fraction of values <= z. Accepts scalars or arrays."""
        counts = np.searchsorted(self._values, z, side="right")
        out = counts / self.n
        return float(out) if np.isscalar(z) else out

    def cdf_strict(self, z):
        """Left-limit empirical CDF: fraction of values < z."""
        counts = np.searchsorted(self._values, z, side="left")
        out = counts / self.n
        return float(out) if np.isscalar(z) else out
