import math
import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import central_difference, gini_impurity, spawn_seed

from screenkit.errors import ConfigError, DataError
from screenkit.learners import (
    ForestConfig, LinearModel, LogisticConfig, MultilabelModel, TrainConfig, TreeConfig, fit_binary, gini,
    joint_proba, logistic_loss_grad, predict_proba, train_forest, train_logistic, train_multilabel, train_tree,
)
from screenkit.learners.io import dumps, load_model, loads, save_model
from screenkit.rng import derive_seed


def planted(seed, n=400, p=6, strength=2.0):
    g = np.random.default_rng(seed)
    X = g.normal(size=(n, p))
    logit = strength * X[:, 0] - strength * X[:, 1]
    y = (g.random(n) < 1 / (1 + np.exp(-logit))).astype(int)
    return X, y


def accuracy(model, X, y):
    return float(np.mean((model.predict_proba(X)[:, 1] > 0.5) == y))


# -------------------------------------------------------------- logistic


@given(st.integers(0, 2**31 - 1), st.sampled_from([0.0, 1e-3, 0.5]))
def test_gradient_matches_central_difference(seed, lam):
    g = np.random.default_rng(seed)
    X = g.normal(size=(30, 4))
    y = (g.random(30) < 0.4).astype(float)
    mean, scale = X.mean(axis=0), X.std(axis=0)
    theta0 = g.normal(size=5)

    def model(theta):
        return LinearModel(theta[:-1], float(theta[-1]), mean, scale)

    _, grad = logistic_loss_grad(model(theta0), X, y, lam)
    fd = central_difference(lambda t: logistic_loss_grad(model(t), X, y, lam)[0], theta0)
    assert np.allclose(grad, fd, rtol=1e-5, atol=1e-7)


def test_loss_at_zero_is_log2():
    X = np.random.default_rng(0).normal(size=(10, 3))
    m = LinearModel(np.zeros(3), 0.0, np.zeros(3), np.ones(3))
    loss, _ = logistic_loss_grad(m, X, np.array([0, 1] * 5), 0.1)
    assert loss == pytest.approx(math.log(2), abs=1e-12)


def test_heavy_penalty_predicts_prior():
    X, y = planted(1)
    m = train_logistic(X, y, LogisticConfig(l2_lambda=1e6))
    assert np.allclose(m.predict_proba(X)[:, 1], y.mean(), atol=1e-4)


def test_separable_fixture_fit_exactly():
    x = np.arange(20, dtype=float)
    X = np.column_stack([x, np.random.default_rng(2).normal(size=20)])
    y = (x >= 10).astype(int)
    m = train_logistic(X, y, LogisticConfig(l2_lambda=1e-4, max_iters=3000))
    assert accuracy(m, X, y) == 1.0


def test_single_class_labels_give_constant_model():
    X = np.random.default_rng(3).normal(size=(12, 2))
    with pytest.warns(UserWarning):
        m = train_logistic(X, np.zeros(12, int))
    assert np.all(m.predict_proba(X)[:, 1] < 1e-9)


def test_duplicated_dataset_same_model():
    X, y = planted(4, n=120)
    a = train_logistic(X, y)
    b = train_logistic(np.vstack([X, X]), np.concatenate([y, y]))
    assert np.allclose(a.predict_proba(X), b.predict_proba(X), atol=1e-5)


@given(st.integers(0, 2**31 - 1))
def test_loss_never_increases(seed):
    X, y = planted(seed, n=80, p=4)
    m = train_logistic(X, y, LogisticConfig(max_iters=200))
    h = np.asarray(m.loss_history)
    assert np.all(np.diff(h) <= 1e-12)


def test_logistic_rejects_bad_input():
    with pytest.raises(DataError):
        train_logistic(np.array([[np.nan], [1.0]]), np.array([0, 1]))
    with pytest.raises(DataError):
        train_logistic(np.array([[0.0], [1.0]]), np.array([0, 2]))
    with pytest.raises(ConfigError):
        LogisticConfig(l2_lambda=-1)


def test_converged_flag_set():
    X, y = planted(5, n=200)
    m = train_logistic(X, y, LogisticConfig(max_iters=5000))
    assert m.converged


# ------------------------------------------------------------------ tree


@given(st.lists(st.integers(0, 3), min_size=1, max_size=40))
def test_gini_matches_oracle(labels):
    counts = np.bincount(labels, minlength=4)
    assert gini(counts) == pytest.approx(gini_impurity(labels), abs=1e-12)


def test_gini_examples():
    assert gini([5, 5]) == 0.5
    assert gini([7, 0]) == 0.0


def test_pure_node_is_leaf():
    X = np.random.default_rng(0).normal(size=(30, 3))
    t = train_tree(X, np.ones(30, int), TreeConfig(min_samples_leaf=1))
    assert t.n_nodes == 1 and t.is_leaf(0)


def test_xor_learned():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]] * 5, dtype=float)
    y = (X[:, 0] != X[:, 1]).astype(int)
    t = train_tree(X, y, TreeConfig(max_depth=2, min_samples_leaf=1))
    assert np.array_equal(t.predict_proba(X).argmax(axis=1), y)


def test_depth_and_leaf_size_respected():
    X, y = planted(6, n=300)
    t = train_tree(X, y, TreeConfig(max_depth=3, min_samples_leaf=20))
    assert t.depth() <= 3
    leaves = t.apply(X)
    assert np.bincount(leaves)[np.unique(leaves)].min() >= 20


@given(st.integers(0, 2**31 - 1))
def test_monotone_transform_invariance_on_training_points(seed):
    X, y = planted(seed, n=120, p=3)
    Xt = np.column_stack([np.exp(X[:, 0]), X[:, 1] ** 3, 5 * X[:, 2] - 1])
    cfg = TreeConfig(max_depth=5, min_samples_leaf=3)
    a = train_tree(X, y, cfg).predict_proba(X)
    b = train_tree(Xt, y, cfg).predict_proba(Xt)
    assert np.array_equal(a, b)


def test_tree_probabilities_are_distributions():
    X, y = planted(7)
    P = train_tree(X, y).predict_proba(X)
    assert np.allclose(P.sum(axis=1), 1.0) and (P >= 0).all()


def test_tree_config_errors():
    with pytest.raises(ConfigError):
        TreeConfig(min_samples_leaf=0)
    with pytest.raises(ConfigError):
        TreeConfig(criterion="entropy")


# ---------------------------------------------------------------- forest


def test_forest_one_tree_no_bootstrap_all_features_equals_tree():
    X, y = planted(8, n=200)
    cfg = TreeConfig(max_depth=4)
    f = train_forest(X, y, ForestConfig(n_trees=1, mtry=None, bootstrap=False, tree=cfg))
    t = train_tree(X, y, cfg)
    assert np.array_equal(f.predict_proba(X), t.predict_proba(X))


def test_forest_deterministic_and_thread_independent():
    X, y = planted(9, n=300)
    cfg = ForestConfig(n_trees=12, seed=42)
    a = train_forest(X, y, cfg).predict_proba(X)
    b = train_forest(X, y, cfg).predict_proba(X)
    c = train_forest(X, y, cfg, threads=4).predict_proba(X)
    assert np.array_equal(a, b) and np.array_equal(a, c)


def test_forest_seed_changes_model():
    X, y = planted(9, n=300)
    a = train_forest(X, y, ForestConfig(n_trees=5, seed=1)).predict_proba(X)
    b = train_forest(X, y, ForestConfig(n_trees=5, seed=2)).predict_proba(X)
    assert not np.array_equal(a, b)


def test_forest_tree_seeds_follow_seed_sequence():
    X, y = planted(10, n=100)
    f = train_forest(X, y, ForestConfig(n_trees=4, seed=17))
    assert f.tree_seeds == [spawn_seed(17, t) for t in range(4)]


def test_forest_learns_planted_signal():
    X, y = planted(11, n=800)
    Xte, yte = planted(12, n=800)
    f = train_forest(X, y, ForestConfig(n_trees=30, seed=0))
    assert accuracy(f, Xte, yte) > 0.75


def test_forest_mtry_rules():
    assert ForestConfig().resolve_mtry(10) == 4
    assert ForestConfig(mtry=None).resolve_mtry(10) == 10
    assert ForestConfig(mtry=50).resolve_mtry(10) == 10
    with pytest.raises(ConfigError):
        ForestConfig(mtry="log2")


# ------------------------------------------------------------ multilabel


def test_joint_probability_example():
    P = joint_proba(np.array([[0.9, 0.1]]))
    assert np.allclose(P, [[0.09, 0.81, 0.01, 0.09]])


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=20))
def test_joint_probability_sums_to_one(heads):
    P = joint_proba(np.array(heads))
    assert np.allclose(P.sum(axis=1), 1.0) and (P >= -1e-15).all()


class _Const:
    n_features = 1

    def __init__(self, p):
        self.p = p

    def predict_proba(self, X):
        return np.column_stack([np.full(len(X), 1 - self.p), np.full(len(X), self.p)])


@pytest.mark.parametrize("pa,pd,expected", [(0.5, 0.5, 0), (0.51, 0.2, 1), (0.2, 0.9, 2), (0.7, 0.7, 3)])
def test_four_way_rule(pa, pd, expected):
    m = MultilabelModel(_Const(pa), _Const(pd))
    assert m.predict_class4(np.zeros((1, 1)))[0] == expected


def test_multilabel_heads_use_derived_seeds():
    X, y = planted(13, n=200)
    labels = np.column_stack([y, 1 - y])
    cfg = TrainConfig(forest=ForestConfig(n_trees=3))
    m = train_multilabel(X, labels, "forest", cfg, seed=5)
    assert m.asd_head.root_seed == derive_seed(5, 0)
    assert m.adhd_head.root_seed == derive_seed(5, 1)


@pytest.mark.parametrize("kind", ["logistic", "tree", "forest"])
def test_model_io_roundtrip(kind, tmp_path):
    X, y = planted(14, n=150)
    cfg = TrainConfig(forest=ForestConfig(n_trees=4))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        m = train_multilabel(X, np.column_stack([y, X[:, 2] > 0]), kind, cfg, seed=3)
    path = tmp_path / "m.json"
    save_model(m, path)
    back = load_model(path)
    assert np.array_equal(back.predict_proba(X), m.predict_proba(X))
    assert dumps(back) == dumps(m)


def test_model_io_rejects_foreign_files():
    with pytest.raises(ConfigError):
        loads('{"format": "other", "version": 1, "model": {}}')
    with pytest.raises(ConfigError):
        loads('{"format": "screenkit-model", "version": 99, "model": {}}')


def test_predict_proba_checks_width():
    X, y = planted(15, n=60)
    m = fit_binary("logistic", X, y)
    with pytest.raises(ValueError):
        predict_proba(m, X[:, :2])
    with pytest.raises(ConfigError):
        fit_binary("svm", X, y)


def test_forest_config_seed_replaced_by_fit_binary():
    X, y = planted(16, n=100)
    cfg = TrainConfig(forest=replace(ForestConfig(n_trees=2), seed=999))
    assert fit_binary("forest", X, y, cfg, seed=4).root_seed == 4
