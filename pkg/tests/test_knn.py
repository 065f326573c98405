"""Nearest-neighbor dispersion estimator tests."""

import numpy as np
import pytest

from confband.regressors.knn import KnnDispersion


def test_single_row_predicts_that_residual():
    model = KnnDispersion(k=1).fit([[0.0]], [2.5])
    grid = np.array([[-3.0], [0.0], [9.0]])
    assert np.allclose(model.predict(grid), 2.5)


def test_two_nearest_rows_are_averaged():
    X = np.array([[0.0], [1.0], [10.0]])
    residuals = np.array([1.0, 3.0, 100.0])
    model = KnnDispersion(k=2).fit(X, residuals)
    assert model.predict([[0.4]])[0] == pytest.approx(2.0)
    assert model.predict([[9.0]])[0] == pytest.approx(51.5)


def test_constant_residual_field_is_reproduced_everywhere():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(30, 2))
    model = KnnDispersion(k=7).fit(X, np.full(30, 0.8))
    assert np.allclose(model.predict(rng.normal(size=(20, 2))), 0.8)


def test_full_neighborhood_returns_global_mean():
    rng = np.random.default_rng(19)
    X = rng.normal(size=(15, 1))
    residuals = np.abs(rng.normal(size=15))
    model = KnnDispersion(k=15).fit(X, residuals)
    assert model.predict([[0.3]])[0] == pytest.approx(float(residuals.mean()))


def test_matches_brute_force_neighbor_average():
    rng = np.random.default_rng(31)
    X = rng.normal(size=(40, 3))
    residuals = np.abs(rng.normal(size=40))
    k = 5
    model = KnnDispersion(k=k).fit(X, residuals)
    queries = rng.normal(size=(12, 3))
    got = model.predict(queries)
    for i, q in enumerate(queries):
        dist = np.sqrt(((X - q) ** 2).sum(axis=1))
        nearest = np.argsort(dist, kind="stable")[:k]
        assert got[i] == pytest.approx(float(residuals[nearest].mean()))


def test_predictions_are_never_negative():
    rng = np.random.default_rng(44)
    X = rng.normal(size=(25, 2))
    residuals = np.abs(rng.normal(size=25))
    model = KnnDispersion(k=3).fit(X, residuals)
    assert (model.predict(rng.normal(size=(40, 2))) >= 0).all()


def test_k_larger_than_sample_is_rejected():
    with pytest.raises(ValueError):
        KnnDispersion(k=4).fit(np.ones((3, 1)), np.ones(3))


def test_invalid_k_and_negative_residuals_are_rejected():
    with pytest.raises(ValueError):
        KnnDispersion(k=0)
    with pytest.raises(ValueError):
        KnnDispersion(k=2).fit([[0.0], [1.0]], [1.0, -0.5])


def test_predict_before_fit_is_an_error():
    with pytest.raises(RuntimeError):
        KnnDispersion(k=1).predict([[0.0]])
