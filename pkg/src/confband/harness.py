"""Experiment harness: repeated-split evaluation of the four band methods.

Each repetition draws a fresh test split, halves the remaining rows into
proper-training and calibration sets, standardizes using proper-training
statistics only, fits the requested engine, calibrates, and scores
coverage and average interval length on the test rows. Summaries average
over repetitions. Interval lengths are reported in standardized response
units unless configured otherwise.

Engines are referred to by name:

- "ridge": closed-form ridge with cross-validated penalty (point predictor
  only; pair methods reject it)
- "mlp": small ReLU network (squared-error head or two-output pinball head)
- "qrf": regression forest (leaf-mean readout or weighted-CDF quantiles)
- "linear-q": linear pinball models (median as the point predictor)
- "oracle": exact synthetic conditional summaries, for guarantee audits

Dispersion estimates for the locally adaptive method come from k-nearest
neighbor averaging of absolute residuals for the ridge and linear engines,
and from the engine's own mean regressor (clamped at zero) for the mlp and
qrf engines.
"""

import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .conformal import (
    ConformalBand,
    cqr_asym_calibrate,
    cqr_calibrate,
    local_conformal_calibrate,
    split_conformal_calibrate,
)
from .datagen import (
    Dataset,
    OracleDispersionRegressor,
    OracleMeanRegressor,
    OracleQuantileRegressor,
    OracleQuantiles,
    StandardizationParams,
    SyntheticSpec,
    generate,
    standardize_apply,
    standardize_fit,
    standardize_invert,
)
from .quantiles import check_level
from .regressors import (
    ForestConfig,
    ForestMeanRegressor,
    KnnDispersion,
    LinearMedianRegressor,
    LinearQuantilePair,
    MlpConfig,
    MlpMeanRegressor,
    MlpQuantilePair,
    NonNegativeDispersion,
    QuantileForestRegressor,
    QuantileRegressor,
    RidgeRegressor,
    cross_validate_l2,
)

__all__ = [
    "METHODS",
    "ENGINES",
    "QUANTILE_TUNING_GRID",
    "ExperimentConfig",
    "RepetitionResult",
    "MethodSummary",
    "ExperimentReport",
    "CSV_HEADER",
    "fix_crossing",
    "CrossingFixPair",
    "repetition_split",
    "fit_and_calibrate",
    "run_experiment",
    "tune_quantile_levels",
    "coverage_audit",
    "band_comparison_demo",
    "emit_report",
]

METHODS = ("split", "local", "cqr", "cqr-asym")
ENGINES = ("ridge", "mlp", "qrf", "linear-q", "oracle")
QUANTILE_TUNING_GRID = (0.02, 0.05, 0.1, 0.15, 0.2, 0.3)

CSV_HEADER = (
    "method,avg_length,sd_length,avg_coverage,sd_coverage,"
    "tail_lo_miss,tail_hi_miss,n_reps"
)


def fix_crossing(lo, hi) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise repair of crossed quantile estimates: (min, max) per point."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return np.minimum(lo, hi), np.maximum(lo, hi)


class CrossingFixPair(QuantileRegressor):
    """Wraps a quantile regressor, repairing crossings and counting them."""

    def __init__(self, inner: QuantileRegressor):
        self.inner = inner
        self.n_fixed = 0

    def fit(self, X, y, alpha_lo: float, alpha_hi: float) -> "CrossingFixPair":
        self.inner.fit(X, y, alpha_lo, alpha_hi)
        return self

    def predict_pair(self, X) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.inner.predict_pair(X)
        self.n_fixed += int(np.sum(np.asarray(lo) > np.asarray(hi)))
        return fix_crossing(lo, hi)


@dataclass(frozen=True)
class ExperimentConfig:
    """Protocol settings for ``run_experiment``.

    ``forest``, ``mlp``, ``knn_k``, and ``linear_epochs`` configure the
    engines; their seeds are replaced per repetition so repetitions stay
    independent but reproducible from ``seed``.
    """

    methods: tuple[str, ...] = ("cqr",)
    engine: str = "qrf"
    alpha: float = 0.1
    n_repetitions: int = 20
    test_fraction: float = 0.2
    calibration_fraction_of_train: float = 0.5
    tune_quantiles: bool = False
    cv_folds: int = 5
    gamma: float = 1.0
    seed: int = 0
    forest: ForestConfig = ForestConfig()
    mlp: MlpConfig = MlpConfig()
    knn_k: int = 11
    linear_epochs: int = 2000
    report_original_units: bool = False

    def __post_init__(self):
        check_level(self.alpha)
        if not self.methods:
            raise ValueError("methods must be non-empty")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}; choose from {ENGINES}")
        if self.n_repetitions < 1:
            raise ValueError(f"n_repetitions must be >= 1, got {self.n_repetitions}")
        for name, frac in (
            ("test_fraction", self.test_fraction),
            ("calibration_fraction_of_train", self.calibration_fraction_of_train),
        ):
            if not 0.0 < frac < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {frac}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.cv_folds < 2:
            raise ValueError(f"cv_folds must be >= 2, got {self.cv_folds}")


@dataclass(frozen=True)
class RepetitionResult:
    """Test-set metrics for one (method, repetition) cell."""

    method: str
    repetition: int
    coverage: float
    avg_length: float
    tail_lo_miss: float
    tail_hi_miss: float
    n_crossings_fixed: int
    alpha_nominal: float | None = None
    wall_time_s: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        # wall time is intentionally left out so reports with identical
        # configuration and seed are byte-identical
        return {
            "method": self.method,
            "repetition": self.repetition,
            "coverage": _num(self.coverage),
            "avg_length": _num(self.avg_length),
            "tail_lo_miss": _num(self.tail_lo_miss),
            "tail_hi_miss": _num(self.tail_hi_miss),
            "n_crossings_fixed": self.n_crossings_fixed,
            "alpha_nominal": self.alpha_nominal,
        }

    @staticmethod
    def from_dict(d: dict) -> "RepetitionResult":
        return RepetitionResult(
            method=d["method"],
            repetition=d["repetition"],
            coverage=_denum(d["coverage"]),
            avg_length=_denum(d["avg_length"]),
            tail_lo_miss=_denum(d["tail_lo_miss"]),
            tail_hi_miss=_denum(d["tail_hi_miss"]),
            n_crossings_fixed=d["n_crossings_fixed"],
            alpha_nominal=d["alpha_nominal"],
        )


@dataclass(frozen=True)
class MethodSummary:
    """Across-repetition aggregates for one method (Table-style row)."""

    method: str
    avg_length: float
    sd_length: float
    avg_coverage: float
    sd_coverage: float
    tail_lo_miss: float
    tail_hi_miss: float
    n_reps: int

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "avg_length": _num(self.avg_length),
            "sd_length": _num(self.sd_length),
            "avg_coverage": _num(self.avg_coverage),
            "sd_coverage": _num(self.sd_coverage),
            "tail_lo_miss": _num(self.tail_lo_miss),
            "tail_hi_miss": _num(self.tail_hi_miss),
            "n_reps": self.n_reps,
        }

    @staticmethod
    def from_dict(d: dict) -> "MethodSummary":
        return MethodSummary(
            method=d["method"],
            avg_length=_denum(d["avg_length"]),
            sd_length=_denum(d["sd_length"]),
            avg_coverage=_denum(d["avg_coverage"]),
            sd_coverage=_denum(d["sd_coverage"]),
            tail_lo_miss=_denum(d["tail_lo_miss"]),
            tail_hi_miss=_denum(d["tail_hi_miss"]),
            n_reps=d["n_reps"],
        )


def _num(x: float):
    """JSON-safe number: non-finite floats become strings."""
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _denum(x) -> float:
    return float(x)


@dataclass(frozen=True)
class ExperimentReport:
    """Everything a run produced: config echo, per-repetition rows, summaries."""

    config: dict
    summaries: tuple[MethodSummary, ...]
    repetitions: tuple[RepetitionResult, ...]
    failures: tuple[dict, ...] = ()

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "summaries": [s.to_dict() for s in self.summaries],
            "repetitions": [r.to_dict() for r in self.repetitions],
            "failures": list(self.failures),
        }

    @staticmethod
    def from_dict(d: dict) -> "ExperimentReport":
        return ExperimentReport(
            config=d["config"],
            summaries=tuple(MethodSummary.from_dict(s) for s in d["summaries"]),
            repetitions=tuple(RepetitionResult.from_dict(r) for r in d["repetitions"]),
            failures=tuple(d["failures"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @staticmethod
    def from_json(text: str) -> "ExperimentReport":
        return ExperimentReport.from_dict(json.loads(text))

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for s in self.summaries:
            lines.append(
                ",".join(
                    [
                        s.method,
                        _csv_num(s.avg_length),
                        _csv_num(s.sd_length),
                        _csv_num(s.avg_coverage),
                        _csv_num(s.sd_coverage),
                        _csv_num(s.tail_lo_miss),
                        _csv_num(s.tail_hi_miss),
                        str(s.n_reps),
                    ]
                )
            )
        return "\n".join(lines) + "\n"


def _csv_num(x: float) -> str:
    return repr(float(x))


def emit_report(report: ExperimentReport, path: str) -> None:
    """Write the report as CSV or JSON depending on the file extension."""
    if path.endswith(".csv"):
        text = report.to_csv()
    elif path.endswith(".json"):
        text = report.to_json()
    else:
        raise ValueError(f"output path must end with .csv or .json, got {path!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def repetition_split(n: int, cfg: ExperimentConfig, rng) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One repetition's (test, proper-training, calibration) row indices."""
    order = rng.permutation(n)
    n_test = int(round(cfg.test_fraction * n))
    n_test = min(max(n_test, 1), n - 2)
    test_idx = order[:n_test]
    train = order[n_test:]
    n_cal = int(round(cfg.calibration_fraction_of_train * train.size))
    n_cal = min(max(n_cal, 1), train.size - 1)
    i2 = train[:n_cal]
    i1 = train[n_cal:]
    return test_idx, i1, i2


class _EngineBundle:
    """Lazily fits the engines one repetition needs on its proper-training rows.

    Models are cached so methods sharing a fitted predictor (split and
    local share the point predictor; cqr and cqr-asym share the quantile
    pair) do not refit. RNG draws happen at first use in a fixed order, so
    results are reproducible for a fixed method list.
    """

    def __init__(
        self,
        cfg: ExperimentConfig,
        X1: np.ndarray,
        y1: np.ndarray,
        rng,
        oracle: OracleQuantiles | None,
        params: StandardizationParams,
    ):
        self.cfg = cfg
        self.X1 = X1
        self.y1 = y1
        self.rng = rng
        self.oracle = oracle
        self.params = params
        self._mean = None
        self._dispersion = None
        self._pair: CrossingFixPair | None = None
        self.alpha_nominal: float | None = None
        if cfg.engine == "oracle" and oracle is None:
            raise ValueError("engine 'oracle' requires synthetic data")

    def _draw_seed(self) -> int:
        return int(self.rng.integers(2**63))

    def mean_model(self):
        if self._mean is None:
            cfg = self.cfg
            if cfg.engine == "ridge":
                l2 = cross_validate_l2(self.X1, self.y1, n_folds=cfg.cv_folds, rng=self.rng)
                model = RidgeRegressor(l2).fit(self.X1, self.y1)
            elif cfg.engine == "mlp":
                mlp_cfg = replace(cfg.mlp, seed=self._draw_seed())
                model = MlpMeanRegressor(mlp_cfg, cfg.cv_folds).fit(self.X1, self.y1)
            elif cfg.engine == "qrf":
                forest_cfg = replace(cfg.forest, seed=self._draw_seed())
                model = ForestMeanRegressor(forest_cfg).fit(self.X1, self.y1)
            elif cfg.engine == "linear-q":
                model = LinearMedianRegressor(cfg.linear_epochs).fit(self.X1, self.y1)
            else:
                model = _StandardizedOracleMean(self.oracle, self.params)
            self._mean = model
        return self._mean

    def dispersion_model(self):
        if self._dispersion is None:
            cfg = self.cfg
            if cfg.engine == "oracle":
                self._dispersion = _StandardizedOracleDispersion(self.oracle, self.params)
                return self._dispersion
            residuals = np.abs(self.y1 - self.mean_model().predict(self.X1))
            if cfg.engine in ("ridge", "linear-q"):
                model = KnnDispersion(k=min(cfg.knn_k, self.X1.shape[0]))
            elif cfg.engine == "mlp":
                mlp_cfg = replace(cfg.mlp, seed=self._draw_seed())
                model = NonNegativeDispersion(MlpMeanRegressor(mlp_cfg, cfg.cv_folds))
            else:
                forest_cfg = replace(cfg.forest, seed=self._draw_seed())
                model = NonNegativeDispersion(ForestMeanRegressor(forest_cfg))
            self._dispersion = model.fit(self.X1, residuals)
        return self._dispersion

    def _fresh_pair(self, seed: int) -> QuantileRegressor:
        cfg = self.cfg
        if cfg.engine == "qrf":
            return QuantileForestRegressor(replace(cfg.forest, seed=seed))
        if cfg.engine == "mlp":
            return MlpQuantilePair(replace(cfg.mlp, seed=seed), cfg.cv_folds)
        if cfg.engine == "linear-q":
            return LinearQuantilePair(cfg.linear_epochs)
        if cfg.engine == "oracle":
            return _StandardizedOracleQuantiles(self.oracle, self.params)
        raise ValueError(
            f"engine {cfg.engine!r} cannot produce quantile pairs; "
            "use qrf, mlp, linear-q, or oracle"
        )

    def quantile_model(self) -> CrossingFixPair:
        """Fitted pair behind a crossing fix, at tuned or default levels."""
        if self._pair is None:
            cfg = self.cfg
            if cfg.tune_quantiles and cfg.engine != "oracle":
                tuning_seed = self._draw_seed()
                levels = tune_quantile_levels(
                    lambda: self._fresh_pair(tuning_seed),
                    self.X1,
                    self.y1,
                    cfg.alpha,
                    cfg.cv_folds,
                    np.random.default_rng(self._draw_seed()),
                )
                self.alpha_nominal = round(2.0 * levels[0], 12)
            else:
                levels = (cfg.alpha / 2.0, 1.0 - cfg.alpha / 2.0)
            pair = CrossingFixPair(self._fresh_pair(self._draw_seed()))
            pair.fit(self.X1, self.y1, *levels)
            self._pair = pair
        return self._pair

    def counting_view(self) -> CrossingFixPair:
        """A fresh crossing counter over the already fitted pair."""
        return CrossingFixPair(self.quantile_model().inner)


class _StandardizedOracleMean(OracleMeanRegressor):
    """Oracle conditional mean composed with the repetition's standardization."""

    def __init__(self, oracle: OracleQuantiles, params: StandardizationParams):
        super().__init__(oracle)
        self.params = params

    def predict(self, X) -> np.ndarray:
        x_raw = standardize_invert(self.params, X)[:, 0]
        return self.oracle.mean(x_raw) / self.params.response_scale


class _StandardizedOracleDispersion(OracleDispersionRegressor):
    def __init__(self, oracle: OracleQuantiles, params: StandardizationParams):
        super().__init__(oracle)
        self.params = params

    def predict(self, X) -> np.ndarray:
        x_raw = standardize_invert(self.params, X)[:, 0]
        return self.oracle.mean_abs_deviation(x_raw) / self.params.response_scale


class _StandardizedOracleQuantiles(OracleQuantileRegressor):
    def __init__(self, oracle: OracleQuantiles, params: StandardizationParams):
        super().__init__(oracle)
        self.params = params

    def predict_pair(self, X) -> tuple[np.ndarray, np.ndarray]:
        if self._levels is None:
            raise RuntimeError("fit() must be called before predict_pair()")
        x_raw = standardize_invert(self.params, X)[:, 0]
        scale = self.params.response_scale
        return (
            self.oracle.quantile(x_raw, self._levels[0]) / scale,
            self.oracle.quantile(x_raw, self._levels[1]) / scale,
        )


def fit_and_calibrate(
    method: str,
    bundle: _EngineBundle,
    X2: np.ndarray,
    y2: np.ndarray,
    cfg: ExperimentConfig,
) -> tuple[ConformalBand, CrossingFixPair | None]:
    """Fit (via the bundle) and calibrate one method; test rows never enter.

    Returns the band and, for the pair methods, the crossing-fix wrapper
    whose counter covers this method's calibration and later predictions.
    """
    if method == "split":
        return split_conformal_calibrate(bundle.mean_model(), X2, y2, cfg.alpha), None
    if method == "local":
        band = local_conformal_calibrate(
            bundle.mean_model(),
            bundle.dispersion_model(),
            X2,
            y2,
            cfg.alpha,
            cfg.gamma,
        )
        return band, None
    bundle.quantile_model()  # ensure fitted (and tuned) once
    view = bundle.counting_view()
    if method == "cqr":
        return cqr_calibrate(view, X2, y2, cfg.alpha), view
    if method == "cqr-asym":
        half = cfg.alpha / 2.0
        return cqr_asym_calibrate(view, X2, y2, half, half), view
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def _evaluate(band: ConformalBand, X_test, y_test, length_scale: float):
    lo, hi = band.predict_interval(X_test)
    covered = (y_test >= lo) & (y_test <= hi)
    return (
        float(np.mean(covered)),
        float(np.mean(hi - lo) * length_scale),
        float(np.mean(y_test < lo)),
        float(np.mean(y_test > hi)),
    )


def run_experiment(
    cfg: ExperimentConfig,
    dataset: Dataset,
    oracle: OracleQuantiles | None = None,
) -> ExperimentReport:
    """Run the repeated-split protocol and aggregate per-method metrics.

    ``oracle`` enables the "oracle" engine on synthetic data. Engine
    failures abort their repetition and are recorded in the report's
    ``failures`` list rather than silently skipped.
    """
    n = dataset.n_rows
    if n < 40:
        raise ValueError(f"need at least 40 rows for the split protocol, got {n}")

    rows: list[RepetitionResult] = []
    failures: list[dict] = []
    rep_seqs = np.random.SeedSequence(cfg.seed).spawn(cfg.n_repetitions)
    for rep, seq in enumerate(rep_seqs):
        rng = np.random.default_rng(seq)
        test_idx, i1, i2 = repetition_split(n, cfg, rng)
        try:
            params = standardize_fit(dataset.X[i1], dataset.y[i1])
            X1, y1 = standardize_apply(params, dataset.X[i1], dataset.y[i1])
            X2, y2 = standardize_apply(params, dataset.X[i2], dataset.y[i2])
            Xt, yt = standardize_apply(params, dataset.X[test_idx], dataset.y[test_idx])
            length_scale = params.response_scale if cfg.report_original_units else 1.0
            bundle = _EngineBundle(cfg, X1, y1, rng, oracle, params)
            for method in cfg.methods:
                t0 = time.perf_counter()
                band, counter = fit_and_calibrate(method, bundle, X2, y2, cfg)
                coverage, avg_len, miss_lo, miss_hi = _evaluate(band, Xt, yt, length_scale)
                rows.append(
                    RepetitionResult(
                        method=method,
                        repetition=rep,
                        coverage=coverage,
                        avg_length=avg_len,
                        tail_lo_miss=miss_lo,
                        tail_hi_miss=miss_hi,
                        n_crossings_fixed=counter.n_fixed if counter is not None else 0,
                        alpha_nominal=bundle.alpha_nominal if counter is not None else None,
                        wall_time_s=time.perf_counter() - t0,
                    )
                )
        except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
            failures.append({"repetition": rep, "error": str(exc)})
            continue

    if not rows:
        raise RuntimeError(
            f"every repetition failed; first error: {failures[0]['error']}"
        )
    summaries = summarize(rows, cfg.methods)
    return ExperimentReport(
        config=_config_echo(cfg, dataset),
        summaries=tuple(summaries),
        repetitions=tuple(rows),
        failures=tuple(failures),
    )


def summarize(rows, method_order) -> list[MethodSummary]:
    out = []
    for method in method_order:
        ours = [r for r in rows if r.method == method]
        if not ours:
            continue
        lengths = np.array([r.avg_length for r in ours])
        coverages = np.array([r.coverage for r in ours])
        out.append(
            MethodSummary(
                method=method,
                avg_length=float(np.mean(lengths)),
                sd_length=float(np.std(lengths, ddof=1)) if len(ours) > 1 else 0.0,
                avg_coverage=float(np.mean(coverages)),
                sd_coverage=float(np.std(coverages, ddof=1)) if len(ours) > 1 else 0.0,
                tail_lo_miss=float(np.mean([r.tail_lo_miss for r in ours])),
                tail_hi_miss=float(np.mean([r.tail_hi_miss for r in ours])),
                n_reps=len(ours),
            )
        )
    return out


def _config_echo(cfg: ExperimentConfig, dataset: Dataset) -> dict:
    return {
        "methods": list(cfg.methods),
        "engine": cfg.engine,
        "alpha": cfg.alpha,
        "n_repetitions": cfg.n_repetitions,
        "test_fraction": cfg.test_fraction,
        "calibration_fraction_of_train": cfg.calibration_fraction_of_train,
        "tune_quantiles": cfg.tune_quantiles,
        "cv_folds": cfg.cv_folds,
        "gamma": cfg.gamma,
        "seed": cfg.seed,
        "n_rows": dataset.n_rows,
        "n_features": dataset.X.shape[1],
        "report_original_units": cfg.report_original_units,
    }


def tune_quantile_levels(
    make_pair,
    X1,
    y1,
    alpha: float,
    cv_folds: int,
    rng,
    grid: tuple[float, ...] = QUANTILE_TUNING_GRID,
) -> tuple[float, float]:
    """Pick nominal fit levels by cross-validated mean interval length.

    Each grid point alpha_nom maps to the symmetric pair
    (alpha_nom / 2, 1 - alpha_nom / 2). Per fold, the non-validation rows
    are halved into fit and calibration parts, the pair is conformalized at
    the target ``alpha``, and the mean interval length on the validation
    fold is recorded. Ties go to the grid point nearest ``alpha``.
    """
    if not grid:
        raise ValueError("tuning grid must be non-empty")
    check_level(alpha)
    X1 = np.asarray(X1, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    n = X1.shape[0]
    order = rng.permutation(n)
    folds = [order[f::cv_folds] for f in range(cv_folds)]
    halves = [rng.permutation(n - f.size) for f in folds]

    best: tuple[float, float, float] | None = None  # (score, |nom-alpha|, nom)
    for nominal in grid:
        check_level(nominal)
        levels = (nominal / 2.0, 1.0 - nominal / 2.0)
        total = 0.0
        for f, val_idx in enumerate(folds):
            rest_mask = np.ones(n, dtype=bool)
            rest_mask[val_idx] = False
            rest = np.flatnonzero(rest_mask)
            shuffled = rest[halves[f]]
            cut = shuffled.size // 2
            fit_idx, cal_idx = shuffled[:cut], shuffled[cut:]
            pair = CrossingFixPair(make_pair())
            pair.fit(X1[fit_idx], y1[fit_idx], *levels)
            band = cqr_calibrate(pair, X1[cal_idx], y1[cal_idx], alpha)
            lo, hi = band.predict_interval(X1[val_idx])
            total += float(np.mean(hi - lo))
        key = (total / cv_folds, abs(nominal - alpha), nominal)
        if best is None or key < best:
            best = key
    nominal = best[2]
    return nominal / 2.0, 1.0 - nominal / 2.0


def band_comparison_demo(
    n: int = 2000,
    seed: int = 0,
    alpha: float = 0.1,
    gamma: float = 1.0,
    n_trees: int = 1000,
    grid_size: int = 501,
    kind: str = "heteroscedastic_outliers",
) -> tuple[list[MethodSummary], dict[str, np.ndarray]]:
    """Fit the three forest-backed bands on one split of synthetic data.

    Returns single-repetition summaries for the fixed-width, locally
    adaptive, and quantile-pair methods, plus interval bounds over an
    evenly spaced feature grid in original response units (for plotting).
    """
    cfg = ExperimentConfig(
        methods=("split", "local", "cqr"),
        engine="qrf",
        alpha=alpha,
        n_repetitions=1,
        gamma=gamma,
        seed=seed,
        forest=ForestConfig(n_trees=n_trees),
    )
    dataset, oracle = generate(SyntheticSpec(kind=kind, n=n, seed=seed))
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
    test_idx, i1, i2 = repetition_split(dataset.n_rows, cfg, rng)
    params = standardize_fit(dataset.X[i1], dataset.y[i1])
    X1, y1 = standardize_apply(params, dataset.X[i1], dataset.y[i1])
    X2, y2 = standardize_apply(params, dataset.X[i2], dataset.y[i2])
    Xt, yt = standardize_apply(params, dataset.X[test_idx], dataset.y[test_idx])
    bundle = _EngineBundle(cfg, X1, y1, rng, oracle, params)

    grid_raw = np.linspace(0.0, 5.0, grid_size)[:, None]
    grid_std = standardize_apply(params, grid_raw)
    bounds: dict[str, np.ndarray] = {"x": grid_raw[:, 0]}
    rows = []
    for method in cfg.methods:
        band, counter = fit_and_calibrate(method, bundle, X2, y2, cfg)
        coverage, avg_len, miss_lo, miss_hi = _evaluate(band, Xt, yt, 1.0)
        rows.append(
            RepetitionResult(
                method=method,
                repetition=0,
                coverage=coverage,
                avg_length=avg_len,
                tail_lo_miss=miss_lo,
                tail_hi_miss=miss_hi,
                n_crossings_fixed=counter.n_fixed if counter is not None else 0,
            )
        )
        lo, hi = band.predict_interval(grid_std)
        bounds[f"{method}_lo"] = lo * params.response_scale
        bounds[f"{method}_hi"] = hi * params.response_scale
    return summarize(rows, cfg.methods), bounds


def coverage_audit(
    n_trials: int,
    alpha: float = 0.1,
    n_calibration: int = 99,
    n_test: int = 200,
    n_train: int = 500,
    engine: str = "linear-q",
    kind: str = "heteroscedastic",
    seed: int = 0,
) -> dict:
    """Monte Carlo check of the finite-sample coverage guarantee.

    One quantile pair is fitted once; each trial redraws calibration and
    test rows from the same law, recalibrates, and scores coverage. For
    continuous data the pooled coverage should land in
    [1 - alpha, 1 - alpha + 1/(n_calibration + 1)] up to binomial noise.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    check_level(alpha)
    rng = np.random.default_rng(seed)
    train, oracle = generate(
        SyntheticSpec(kind=kind, n=n_train, seed=int(rng.integers(2**63)))
    )
    levels = (alpha / 2.0, 1.0 - alpha / 2.0)
    if engine == "linear-q":
        pair: QuantileRegressor = LinearQuantilePair()
    elif engine == "qrf":
        pair = QuantileForestRegressor(ForestConfig(seed=int(rng.integers(2**63))))
    elif engine == "mlp":
        pair = MlpQuantilePair(MlpConfig(seed=int(rng.integers(2**63))))
    elif engine == "oracle":
        pair = OracleQuantileRegressor(oracle)
    else:
        raise ValueError(f"engine {engine!r} cannot produce quantile pairs")
    fixed = CrossingFixPair(pair)
    fixed.fit(train.X, train.y, *levels)

    per_trial = np.empty(n_trials)
    base = SyntheticSpec(kind=kind, n=n_calibration + n_test)
    for t in range(n_trials):
        ds, _ = generate(replace(base, seed=int(rng.integers(2**63))))
        band = cqr_calibrate(fixed, ds.X[:n_calibration], ds.y[:n_calibration], alpha)
        lo, hi = band.predict_interval(ds.X[n_calibration:])
        y_test = ds.y[n_calibration:]
        per_trial[t] = np.mean((y_test >= lo) & (y_test <= hi))

    pooled = float(np.mean(per_trial))
    se = float(np.std(per_trial, ddof=1) / np.sqrt(n_trials)) if n_trials > 1 else 0.0
    lower = 1.0 - alpha
    upper = 1.0 - alpha + 1.0 / (n_calibration + 1)
    return {
        "n_trials": n_trials,
        "alpha": alpha,
        "n_calibration": n_calibration,
        "n_test_per_trial": n_test,
        "engine": engine,
        "kind": kind,
        "pooled_coverage": pooled,
        "se": se,
        "lower_bound": lower,
        "upper_bound": upper,
        "within_bounds_4se": bool(lower - 4 * se <= pooled <= upper + 4 * se),
    }
