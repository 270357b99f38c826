import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import stepwise_sfs

from screenkit.errors import ConfigError, DataError
from screenkit.evaluation import auc_metric
from screenkit.experiments import DataConfig, ExperimentConfig, SfsConfig, prepare_cohort, prepare_feature_set, select_for_task
from screenkit.feature_selection import SelectionTrace, retrain_on_subset, sfs_forward, stratified_folds
from screenkit.learners import ForestConfig, TrainConfig, TreeConfig, train_logistic, train_tree
from screenkit.survey_data import split_dataset
from screenkit.synthetic import SyntheticSpec, generate_synthetic
from screenkit.tasks import PreparedData


def fixture(seed, n=300, p=6, informative=(0,)):
    g = np.random.default_rng(seed)
    X = g.normal(size=(n, p))
    logit = sum(1.8 * X[:, j] for j in informative)
    y = (g.random(n) < 1 / (1 + np.exp(-logit))).astype(int)
    half = n * 2 // 3
    return X[:half], y[:half], X[half:], y[half:]


def logistic_factory(X, y, seed):
    return train_logistic(X, y)


def tree_factory(X, y, seed):
    # bootstrap rows driven by the seed, so the seed actually matters
    rows = np.random.default_rng(seed).integers(0, len(X), len(X))
    return train_tree(X[rows], y[rows], TreeConfig(max_depth=3, min_samples_leaf=5), n_classes=2)


@pytest.mark.parametrize("factory", [logistic_factory, tree_factory])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_matches_stepwise_oracle(factory, seed):
    Xtr, ytr, Xva, yva = fixture(seed, informative=(1, 4))
    trace = sfs_forward(Xtr, ytr, Xva, yva, factory, 4, seed=seed)
    chosen, path = stepwise_sfs(Xtr, ytr, Xva, yva, factory, auc_metric, 4, seed)
    assert trace.indices == chosen
    assert [s for _, s in trace.steps] == [s for _, s in path]


def test_single_informative_feature_first():
    Xtr, ytr, Xva, yva = fixture(3, informative=(2,))
    trace = sfs_forward(Xtr, ytr, Xva, yva, logistic_factory, 1)
    singles = [auc_metric(train_logistic(Xtr[:, [j]], ytr), Xva[:, [j]], yva) for j in range(6)]
    assert trace.indices == [2] == [int(np.argmax(singles))]
    assert trace.steps[0][1] == max(singles)


def test_k_equals_p_selects_everything():
    Xtr, ytr, Xva, yva = fixture(4)
    trace = sfs_forward(Xtr, ytr, Xva, yva, logistic_factory, 6)
    assert sorted(trace.indices) == list(range(6))
    assert trace.subset == [f"x{j}" for j in trace.indices]


@settings(max_examples=20)
@given(st.integers(0, 2**31 - 1), st.integers(1, 5))
def test_subsets_grow_by_one_unique_feature(seed, k):
    Xtr, ytr, Xva, yva = fixture(seed % 1000, n=150, p=5)
    trace = sfs_forward(Xtr, ytr, Xva, yva, logistic_factory, k, seed=seed)
    assert len(trace.steps) == k == len(set(trace.indices))


def test_ties_go_to_lower_index():
    Xtr, ytr, Xva, yva = fixture(5, p=3)
    Xtr = np.column_stack([Xtr[:, 1], Xtr[:, 0], Xtr[:, 0]])
    Xva = np.column_stack([Xva[:, 1], Xva[:, 0], Xva[:, 0]])
    trace = sfs_forward(Xtr, ytr, Xva, yva, logistic_factory, 1)
    assert trace.indices == [1]


def test_trace_reproducible_and_thread_independent():
    Xtr, ytr, Xva, yva = fixture(6, informative=(0, 3))
    a = sfs_forward(Xtr, ytr, Xva, yva, tree_factory, 3, seed=8)
    b = sfs_forward(Xtr, ytr, Xva, yva, tree_factory, 3, seed=8, threads=3)
    assert a.to_dict() == b.to_dict()
    assert SelectionTrace.from_dict(a.to_dict()).to_dict() == a.to_dict()


def test_errors():
    Xtr, ytr, Xva, yva = fixture(7)
    with pytest.raises(ConfigError):
        sfs_forward(Xtr, ytr, Xva, yva, logistic_factory, 7)
    with pytest.raises(ConfigError):
        sfs_forward(Xtr, ytr, Xva, yva, logistic_factory, 0)
    with pytest.raises(DataError):
        sfs_forward(Xtr, ytr, Xva, np.zeros_like(yva), logistic_factory, 2)
    with pytest.raises(DataError):
        sfs_forward(Xtr, np.ones_like(ytr), Xva, yva, logistic_factory, 2)


def test_cv_mode_ignores_validation_data():
    Xtr, ytr, _, _ = fixture(8, informative=(5,))
    trace = sfs_forward(Xtr, ytr, None, None, logistic_factory, 2, cv_folds=4)
    assert trace.indices[0] == 5
    folds = stratified_folds(ytr, 4, 0)
    for f in range(4):
        share = ytr[folds == f].mean()
        assert abs(share - ytr.mean()) < 0.05


# ------------------------------------------------------------- retrain


@pytest.fixture(scope="module")
def cohort():
    cfg = ExperimentConfig(data=DataConfig(synthetic=SyntheticSpec(n_rows=4000, seed=2)))
    return cfg, prepare_cohort(cfg)


def test_retrain_on_all_features_reproduces_full_cells(cohort):
    cfg, c = cohort
    data = prepare_feature_set(c, "group1")
    full = retrain_on_subset(data, list(range(len(data.feature_names))), ("T1", "T2"), ("logistic", "tree"),
                             seed=3, feature_set="group1")
    again = retrain_on_subset(data, list(data.feature_names), ("T1", "T2"), ("logistic", "tree"), seed=3,
                              feature_set="group1")
    for a, b in zip(full.cells, again.cells):
        assert a.to_dict() == b.to_dict()


def test_selected_twelve_close_to_full(cohort):
    cfg, c = cohort
    data = prepare_feature_set(c, "combined")
    trace = select_for_task(data, "T2", SfsConfig(k=12, learner="logistic"), TrainConfig(), seed=0)
    assert len(trace.subset) == 12
    full = retrain_on_subset(data, list(data.feature_names), ("T1", "T2"), ("logistic",), seed=0)
    sub = retrain_on_subset(data, trace.subset, ("T1", "T2"), ("logistic",), seed=0)
    for a, b in zip(full.cells, sub.cells):
        assert abs(a.metrics.roc_auc - b.metrics.roc_auc) <= 0.05


@pytest.mark.slow
def test_single_noise_feature_near_chance():
    # labels and split from the generator, one pure-noise column as the only input
    table, labels = generate_synthetic(SyntheticSpec(n_rows=20000, seed=0))
    split = split_dataset(labels.n_rows, labels.class4, 0)
    aucs = []
    for seed in range(20):
        noise = np.random.default_rng(1000 + seed).normal(size=(labels.n_rows, 1))
        data = PreparedData("noise", noise, ("noise",), labels, split)
        rep = retrain_on_subset(data, ["noise"], ("T1", "T2"), ("logistic",), seed=seed)
        aucs.extend(cell.metrics.roc_auc for cell in rep.cells)
    assert 0.45 <= float(np.mean(aucs)) <= 0.55
    assert np.mean([0.45 <= a <= 0.55 for a in aucs]) >= 0.9


def test_empty_subset_rejected(cohort):
    _, c = cohort
    data = prepare_feature_set(c, "group1")
    with pytest.raises(ConfigError):
        retrain_on_subset(data, [], ("T1",), ("logistic",))


def test_forest_wrapped_selection_smoke(cohort):
    _, c = cohort
    data = prepare_feature_set(c, "group1")
    trace = select_for_task(data, "T3", SfsConfig(k=2, n_trees=5), TrainConfig(forest=ForestConfig(n_trees=5)), 0)
    assert len(trace.subset) == 2 and trace.learner["n_trees"] == 5
