import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import shapley_by_permutations
from partisan_exposure.errors import TooManyFeaturesError, ValidationError
from partisan_exposure.learn import fit_gbm, mean_abs_shap, shapley_values
from partisan_exposure.learn.trees import fit_tree


def gbm_data(n=120, m=5, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, m))
    y = 2 * X[:, 0] + np.sin(2 * X[:, 1]) + 0.5 * X[:, 2] * X[:, 3] + 0.1 * rng.standard_normal(n)
    return X, y


def test_efficiency_on_gbm():
    X, y = gbm_data()
    model = fit_gbm(y, X, n_trees=60)
    e = shapley_values(model, X[:25], X[25:])
    assert np.max(np.abs(e.phi.sum(axis=1) + e.base - model(X[:25]))) < 1e-8


def test_matches_permutation_oracle():
    X, y = gbm_data(m=4, seed=1)
    model = fit_gbm(y, X, n_trees=20)
    bg = X[:30]
    e = shapley_values(model, X[40:43], bg)
    for i in range(3):
        np.testing.assert_allclose(e.phi[i], shapley_by_permutations(model, X[40 + i], bg), atol=1e-12)


def test_linear_closed_form():
    rng = np.random.default_rng(2)
    w = np.array([1.5, -2.0, 0.3, 0.0, 4.0])
    bg = rng.standard_normal((40, 5))
    X = rng.standard_normal((6, 5))
    e = shapley_values(lambda Z: Z @ w + 3.0, X, bg)
    np.testing.assert_allclose(e.phi, w * (X - bg.mean(axis=0)), atol=1e-10)


def test_constant_model():
    bg = np.random.default_rng(3).standard_normal((10, 3))
    e = shapley_values(lambda Z: np.full(len(Z), 7.0), bg[:2], bg)
    np.testing.assert_array_equal(e.phi, 0.0)


def test_two_feature_stump_by_hand():
    # f = 1 if x0 > 0 else 0, plus 2 x1 encoded through a tree on x1 only
    X = np.array([[-1.0, 0.0], [1.0, 0.0], [-1.0, 1.0], [1.0, 1.0]])
    t = fit_tree(X, np.array([0.0, 1.0, 0.0, 1.0]), max_depth=1)

    def f(Z):
        return t.predict(Z) + 2.0 * Z[:, 1]

    bg = X[[0, 2]]  # x0 = -1, x1 in {0, 1}
    x = np.array([1.0, 1.0])
    # coalition values by hand
    v0 = np.mean([0 + 0, 0 + 2])  # nothing fixed
    v1 = np.mean([1 + 0, 1 + 2])  # x0 fixed
    v2 = np.mean([0 + 2, 0 + 2])  # x1 fixed
    v12 = 1 + 2
    phi0 = 0.5 * (v1 - v0) + 0.5 * (v12 - v2)
    phi1 = 0.5 * (v2 - v0) + 0.5 * (v12 - v1)
    e = shapley_values(f, x, bg)
    np.testing.assert_allclose(e.phi[0], [phi0, phi1], atol=1e-12)


def test_duplicated_feature_symmetry():
    X, y = gbm_data(m=4, seed=4)
    X = np.column_stack([X, X[:, 0]])
    g = fit_gbm(y, X, n_trees=40)
    swap = [4, 1, 2, 3, 0]

    def f(Z):
        # average over the relabeling so the model treats the copies alike
        return 0.5 * (g(Z) + g(Z[:, swap]))

    e = shapley_values(f, X[:10], X[10:60])
    np.testing.assert_allclose(e.phi[:, 0], e.phi[:, 4], atol=1e-10)


def test_dummy_feature_exactly_zero():
    X, y = gbm_data(seed=5)
    Xt = X.copy()
    Xt[:, 4] = 0.0  # constant during training, so never split on
    model = fit_gbm(y, Xt, n_trees=40)
    assert 4 not in model.used_features
    e = shapley_values(model, X[:15], X[15:80])
    assert np.all(e.phi[:, 4] == 0.0)


def test_too_many_features():
    bg = np.zeros((2, 13))
    with pytest.raises(TooManyFeaturesError, match="reduce"):
        shapley_values(lambda Z: Z.sum(axis=1), bg[:1], bg)


def test_empty_background():
    with pytest.raises(ValidationError):
        shapley_values(lambda Z: Z.sum(axis=1), np.zeros((1, 2)), np.zeros((0, 2)))


@given(st.integers(1, 6), st.integers(0, 10 ** 6))
@settings(max_examples=20)
def test_efficiency_any_model(m, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, m))

    def f(Z):
        return np.tanh(Z @ A).sum(axis=1) + (Z[:, 0] > 0)

    bg = rng.standard_normal((7, m))
    X = rng.standard_normal((3, m))
    e = shapley_values(f, X, bg)
    np.testing.assert_allclose(e.phi.sum(axis=1) + e.base, f(X), atol=1e-10)


class TestMeanAbs:
    def test_single(self):
        assert mean_abs_shap(np.array([[0.5, -2.0]]), ["a", "b"]) == [("b", 2.0), ("a", 0.5)]

    def test_symmetric_rows(self):
        assert mean_abs_shap(np.array([[0.3, 1.0], [-0.3, 1.0]]), ["a", "b"])[1] == ("a", 0.3)

    def test_empty(self):
        with pytest.raises(ValidationError):
            mean_abs_shap(np.zeros((0, 2)))

    def test_ranking_follows_generator(self):
        rng = np.random.default_rng(6)
        X = rng.uniform(-1, 1, (300, 3))
        y = 3 * X[:, 1] + 1 * X[:, 2] + 0.3 * X[:, 0] + 0.05 * rng.standard_normal(300)
        model = fit_gbm(y, X, n_trees=100)
        e = shapley_values(model, X[:100], X[100:228], ("a", "b", "c"))
        assert [name for name, _ in e.mean_abs()] == ["b", "c", "a"]
