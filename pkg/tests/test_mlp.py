"""Tests for the fully connected networks and their training loop."""

import numpy as np
import pytest

from confband.regressors.mlp import (
    MlpConfig,
    MlpMeanRegressor,
    MlpNetwork,
    MlpQuantilePair,
    _PinballPairHead,
    _SquaredErrorHead,
    fit_mlp_mean,
    fit_mlp_quantiles,
)

Z_90 = 1.6448536269514722


def _numeric_gradient(net, X, y, head, eps=1e-6):
    """Central finite differences of the total loss over all parameters."""
    flat = net.get_flat_params()
    numeric = np.empty_like(flat)
    for i in range(flat.size):
        up = flat.copy()
        up[i] += eps
        down = flat.copy()
        down[i] -= eps
        net.set_flat_params(up)
        loss_up, _, _ = net.loss_and_grads(X, y, head)
        net.set_flat_params(down)
        loss_down, _, _ = net.loss_and_grads(X, y, head)
        numeric[i] = (loss_up - loss_down) / (2.0 * eps)
    net.set_flat_params(flat)
    return numeric


def _gradient_relative_error(seed, head):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(12, 3))
    y = rng.normal(size=12)
    config = MlpConfig(hidden_width=8, dropout_keep_prob=1.0, seed=seed)
    net = MlpNetwork(3, head.n_outputs, config, np.random.default_rng(seed + 1))
    _, weight_grads, bias_grads = net.loss_and_grads(X, y, head)
    analytic = np.concatenate([g.ravel() for g in weight_grads + bias_grads])
    numeric = _numeric_gradient(net, X, y, head)
    return np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)


def test_squared_error_gradients_match_finite_differences():
    for seed in (11, 17):
        rel = _gradient_relative_error(seed, _SquaredErrorHead())
        assert rel < 1e-4


def test_pinball_pair_gradients_match_finite_differences():
    for seed in (11, 17):
        rel = _gradient_relative_error(seed, _PinballPairHead(0.05, 0.95))
        assert rel < 1e-4


def test_mean_network_fits_constant_targets():
    config = MlpConfig(
        max_epochs=800, learning_rate=3e-3, dropout_keep_prob=1.0, seed=9
    )
    X = np.random.default_rng(42).uniform(-1.0, 1.0, size=(120, 2))
    for c in (3.7, -1.25):
        model = MlpMeanRegressor(config, cv_folds=1).fit(X, np.full(120, c))
        err = np.max(np.abs(model.predict(X) - c))
        assert err < abs(c) * 1e-2 + 1e-2


def test_quantile_network_recovers_gaussian_tails():
    rng = np.random.default_rng(7)
    X = np.zeros((1500, 1))
    y = rng.normal(size=1500)
    config = MlpConfig(max_epochs=400, dropout_keep_prob=1.0, seed=3)
    pair = MlpQuantilePair(config, cv_folds=1).fit(X, y, 0.05, 0.95)
    lo, hi = pair.predict_pair(np.zeros((5, 1)))
    assert np.all(np.abs(lo + Z_90) < 0.25)
    assert np.all(np.abs(hi - Z_90) < 0.25)


def test_training_is_deterministic_given_seed():
    rng = np.random.default_rng(21)
    X = rng.normal(size=(60, 2))
    y = X[:, 0] + rng.normal(size=60)
    config = MlpConfig(hidden_width=8, max_epochs=20, seed=5)
    a = fit_mlp_mean(X, y, config, cv_folds=1)
    b = fit_mlp_mean(X, y, config, cv_folds=1)
    grid = rng.normal(size=(10, 2))
    assert np.array_equal(a.predict(grid), b.predict(grid))
    pa = fit_mlp_quantiles(X, y, 0.1, 0.9, config, cv_folds=1)
    pb = fit_mlp_quantiles(X, y, 0.1, 0.9, config, cv_folds=1)
    assert np.array_equal(pa.predict_pair(grid)[0], pb.predict_pair(grid)[0])
    assert np.array_equal(pa.predict_pair(grid)[1], pb.predict_pair(grid)[1])


def test_cross_validated_epoch_selection_runs():
    rng = np.random.default_rng(33)
    X = rng.normal(size=(48, 2))
    y = X[:, 0] - 2.0 * X[:, 1] + 0.1 * rng.normal(size=48)
    config = MlpConfig(hidden_width=8, max_epochs=6, dropout_keep_prob=1.0, seed=2)
    model = MlpMeanRegressor(config, cv_folds=2).fit(X, y)
    preds = model.predict(X)
    assert preds.shape == (48,)
    assert np.all(np.isfinite(preds))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_exploding_learning_rate_raises_divergence_error():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 2))
    y = np.random.default_rng(1).normal(size=40)
    config = MlpConfig(
        max_epochs=5, learning_rate=1e100, dropout_keep_prob=1.0, seed=0
    )
    with pytest.raises(ValueError, match="diverged; reduce learning rate"):
        MlpMeanRegressor(config, cv_folds=1).fit(X, y)


def test_invalid_config_fields_are_rejected():
    with pytest.raises(ValueError):
        MlpConfig(hidden_width=0)
    with pytest.raises(ValueError):
        MlpConfig(n_hidden_layers=0)
    with pytest.raises(ValueError):
        MlpConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        MlpConfig(batch_size=0)
    with pytest.raises(ValueError):
        MlpConfig(weight_decay=-1e-6)
    with pytest.raises(ValueError):
        MlpConfig(dropout_keep_prob=0.0)
    with pytest.raises(ValueError):
        MlpConfig(dropout_keep_prob=1.5)
    with pytest.raises(ValueError):
        MlpConfig(max_epochs=0)


def test_pinball_head_requires_ordered_levels():
    with pytest.raises(ValueError, match="alpha_lo must be below alpha_hi"):
        _PinballPairHead(0.9, 0.1)


def test_predict_before_fit_raises():
    with pytest.raises(RuntimeError, match="fit"):
        MlpMeanRegressor().predict(np.zeros((3, 2)))
    with pytest.raises(RuntimeError, match="fit"):
        MlpQuantilePair().predict_pair(np.zeros((3, 2)))


def test_flat_parameter_round_trip_checks_size():
    net = MlpNetwork(2, 1, MlpConfig(hidden_width=4), np.random.default_rng(0))
    flat = net.get_flat_params()
    net.set_flat_params(flat.copy())
    assert np.array_equal(net.get_flat_params(), flat)
    with pytest.raises(ValueError, match="parameters"):
        net.set_flat_params(flat[:-1])
