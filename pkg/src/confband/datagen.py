"""Data sources: a synthetic generator with known conditional quantiles,
CSV ingestion, and train-set standardization.

The synthetic response follows

    Y = 2 sin(X) + s(X) * eps  (+ outlier_scale * eps' with prob. outlier_prob)

with X uniform on [0, 5] and eps, eps' independent standard normals. The
dispersion s(x) is ``noise_scale * (0.1 + x)`` for the heteroscedastic
kinds and the constant ``noise_scale`` for the homoscedastic kind. The
conditional law is a two-component Gaussian mixture, so exact conditional
quantiles are available for oracle tests: closed form without outliers,
root-finding on the mixture CDF otherwise.
"""

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from .quantiles import check_level
from .regressors.base import (
    DispersionRegressor,
    MeanRegressor,
    QuantileRegressor,
    as_matrix,
    as_vector,
)

__all__ = [
    "SYNTHETIC_KINDS",
    "SyntheticSpec",
    "Dataset",
    "OracleQuantiles",
    "OracleMeanRegressor",
    "OracleQuantileRegressor",
    "OracleDispersionRegressor",
    "generate",
    "load_csv",
    "StandardizationParams",
    "standardize_fit",
    "standardize_apply",
    "standardize_invert",
]

SYNTHETIC_KINDS = ("homoscedastic", "heteroscedastic", "heteroscedastic_outliers")


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus response vector."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = as_matrix(self.X)
        y = as_vector(self.y, X.shape[0])
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.feature_names is not None and len(self.feature_names) != X.shape[1]:
            raise ValueError(
                f"{len(self.feature_names)} feature names for {X.shape[1]} columns"
            )

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class SyntheticSpec:
    """Settings for the synthetic generator.

    ``outlier_prob`` and ``outlier_scale`` only take effect for kind
    "heteroscedastic_outliers"; the other kinds draw no outliers.
    """

    kind: str = "heteroscedastic_outliers"
    n: int = 2000
    noise_scale: float = 1.0
    outlier_prob: float = 0.05
    outlier_scale: float = 25.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SYNTHETIC_KINDS:
            raise ValueError(
                f"kind must be one of {SYNTHETIC_KINDS}, got {self.kind!r}"
            )
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.noise_scale <= 0:
            raise ValueError(f"noise_scale must be > 0, got {self.noise_scale}")
        if not 0.0 <= self.outlier_prob < 1.0:
            raise ValueError(
                f"outlier_prob must be in [0, 1), got {self.outlier_prob}"
            )
        if self.outlier_scale <= 0:
            raise ValueError(f"outlier_scale must be > 0, got {self.outlier_scale}")


@dataclass(frozen=True)
class OracleQuantiles:
    """Exact conditional summaries of the synthetic law.

    With outliers, Y given X = x is the mixture
    (1-p) N(m(x), s(x)^2) + p N(m(x), s(x)^2 + outlier_scale^2); quantiles
    come from inverting its CDF numerically to near machine precision.
    """

    noise_scale: float
    heteroscedastic: bool = True
    outlier_prob: float = 0.0
    outlier_scale: float = 1.0

    def mean(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 2.0 * np.sin(x)

    def scale(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.heteroscedastic:
            return self.noise_scale * (0.1 + x)
        return np.full_like(x, self.noise_scale)

    def quantile(self, x, level: float) -> np.ndarray:
        check_level(level)
        x = np.asarray(x, dtype=float)
        m = self.mean(x)
        s = self.scale(x)
        if self.outlier_prob == 0.0:
            return m + s * norm.ppf(level)
        p = self.outlier_prob
        wide = np.sqrt(s * s + self.outlier_scale**2)

        out = np.empty_like(m)
        for i in range(m.size):
            mi, si, wi = m.flat[i], s.flat[i], wide.flat[i]

            def cdf_minus_level(q):
                return (
                    (1.0 - p) * norm.cdf((q - mi) / si)
                    + p * norm.cdf((q - mi) / wi)
                    - level
                )

            radius = 10.0 * wi
            while cdf_minus_level(mi - radius) > 0 or cdf_minus_level(mi + radius) < 0:
                radius *= 2.0
            out.flat[i] = brentq(
                cdf_minus_level, mi - radius, mi + radius, xtol=1e-13, rtol=1e-15
            )
        return out

    def band(self, x, alpha: float) -> tuple[np.ndarray, np.ndarray]:
        """Central (1 - alpha) interval [q_{alpha/2}(x), q_{1-alpha/2}(x)]."""
        return self.quantile(x, alpha / 2.0), self.quantile(x, 1.0 - alpha / 2.0)

    def mean_abs_deviation(self, x) -> np.ndarray:
        """E|Y - m(x)| given X = x; each mixture component is half-normal."""
        s = self.scale(x)
        wide = np.sqrt(s * s + self.outlier_scale**2)
        p = self.outlier_prob
        return math.sqrt(2.0 / math.pi) * ((1.0 - p) * s + p * wide)


def generate(spec: SyntheticSpec) -> tuple[Dataset, OracleQuantiles]:
    """Draw a dataset from the synthetic law along with its exact quantiles."""
    rng = np.random.default_rng(spec.seed)
    x = rng.uniform(0.0, 5.0, size=spec.n)
    eps = rng.standard_normal(spec.n)
    outlier_prob = spec.outlier_prob if spec.kind == "heteroscedastic_outliers" else 0.0
    oracle = OracleQuantiles(
        noise_scale=spec.noise_scale,
        heteroscedastic=spec.kind != "homoscedastic",
        outlier_prob=outlier_prob,
        outlier_scale=spec.outlier_scale,
    )
    y = oracle.mean(x) + oracle.scale(x) * eps
    if outlier_prob > 0.0:
        hit = rng.random(spec.n) < outlier_prob
        y = y + np.where(hit, spec.outlier_scale * rng.standard_normal(spec.n), 0.0)
    return Dataset(X=x[:, None], y=y, feature_names=("x",)), oracle


class OracleMeanRegressor(MeanRegressor):
    """Point predictor that returns the exact conditional mean."""

    def __init__(self, oracle: OracleQuantiles):
        self.oracle = oracle

    def fit(self, X, y) -> "OracleMeanRegressor":
        return self

    def predict(self, X) -> np.ndarray:
        return self.oracle.mean(as_matrix(X)[:, 0])


class OracleQuantileRegressor(QuantileRegressor):
    """Quantile pair that returns the exact conditional quantiles."""

    def __init__(self, oracle: OracleQuantiles):
        self.oracle = oracle
        self._levels: tuple[float, float] | None = None

    def fit(self, X, y, alpha_lo: float, alpha_hi: float) -> "OracleQuantileRegressor":
        check_level(alpha_lo)
        check_level(alpha_hi)
        self._levels = (alpha_lo, alpha_hi)
        return self

    def predict_pair(self, X) -> tuple[np.ndarray, np.ndarray]:
        if self._levels is None:
            raise RuntimeError("fit() must be called before predict_pair()")
        x = as_matrix(X)[:, 0]
        return (
            self.oracle.quantile(x, self._levels[0]),
            self.oracle.quantile(x, self._levels[1]),
        )


class OracleDispersionRegressor(DispersionRegressor):
    """Dispersion estimate equal to the exact conditional mean absolute deviation."""

    def __init__(self, oracle: OracleQuantiles):
        self.oracle = oracle

    def fit(self, X, residuals) -> "OracleDispersionRegressor":
        return self

    def predict(self, X) -> np.ndarray:
        return self.oracle.mean_abs_deviation(as_matrix(X)[:, 0])


def load_csv(path: str, target_column: str) -> Dataset:
    """Read a numeric CSV with a header row into a dataset.

    Rows containing any cell that does not parse as a finite number are
    dropped; a single warning reports how many. Raises FileNotFoundError
    for a missing file, ValueError("target column not found...") for a bad
    target name, and ValueError("no usable rows...") when every row is
    dropped.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"no usable rows in {path}: file is empty") from None
        header = [name.strip() for name in header]
        if target_column not in header:
            raise ValueError(
                f"target column not found: {target_column!r} (columns: {header})"
            )
        target_idx = header.index(target_column)
        feature_names = tuple(n for i, n in enumerate(header) if i != target_idx)
        if not feature_names:
            raise ValueError("no feature columns besides the target")

        rows = []
        n_dropped = 0
        for cells in reader:
            if len(cells) != len(header):
                n_dropped += 1
                continue
            try:
                values = [float(c) for c in cells]
            except ValueError:
                n_dropped += 1
                continue
            if not all(math.isfinite(v) for v in values):
                n_dropped += 1
                continue
            rows.append(values)

    if n_dropped:
        warnings.warn(f"dropped {n_dropped} rows with missing or non-numeric cells")
    if not rows:
        raise ValueError(f"no usable rows in {path}")
    data = np.asarray(rows, dtype=float)
    mask = np.ones(len(header), dtype=bool)
    mask[target_idx] = False
    return Dataset(X=data[:, mask], y=data[:, target_idx], feature_names=feature_names)


@dataclass(frozen=True)
class StandardizationParams:
    """Affine feature map and response divisor fitted on proper-training rows.

    ``kept_features`` indexes the original columns that survive (constant
    columns are dropped). Sums are accumulated with ``math.fsum`` so the
    parameters do not depend on row order.
    """

    feature_mean: np.ndarray
    feature_std: np.ndarray
    kept_features: np.ndarray
    response_scale: float


def standardize_fit(X, y) -> StandardizationParams:
    """Per-feature mean/std and mean-|y| divisor from (proper training) rows."""
    X = as_matrix(X)
    y = as_vector(y, X.shape[0])
    n = X.shape[0]
    means = np.array([math.fsum(X[:, j]) / n for j in range(X.shape[1])])
    stds = np.array(
        [
            math.sqrt(math.fsum((X[:, j] - means[j]) ** 2) / n)
            for j in range(X.shape[1])
        ]
    )
    kept = np.flatnonzero(stds > 0.0)
    if kept.size < stds.size:
        warnings.warn(f"dropped {stds.size - kept.size} constant feature(s)")
    if kept.size == 0:
        raise ValueError("all features are constant; nothing to standardize")
    response_scale = math.fsum(np.abs(y)) / n
    if response_scale == 0.0:
        raise ValueError("response mean absolute value is zero; cannot rescale")
    return StandardizationParams(
        feature_mean=means[kept],
        feature_std=stds[kept],
        kept_features=kept,
        response_scale=response_scale,
    )


def standardize_apply(params: StandardizationParams, X, y=None):
    """Map features to z-scores and divide the response by its fitted scale."""
    X = as_matrix(X)
    Xs = (X[:, params.kept_features] - params.feature_mean) / params.feature_std
    if y is None:
        return Xs
    y = as_vector(y, X.shape[0])
    return Xs, y / params.response_scale


def standardize_invert(params: StandardizationParams, X_std, y_std=None):
    """Undo ``standardize_apply`` (for the kept feature columns)."""
    X_std = as_matrix(X_std)
    X = X_std * params.feature_std + params.feature_mean
    if y_std is None:
        return X
    y_std = as_vector(y_std, X_std.shape[0])
    return X, y_std * params.response_scale
