"""Acceptance criteria A1-A8, each reported as one PASS/FAIL line.

The lines are echoed in the pytest terminal summary.  A8 needs real survey
files and a completed codebook; without SCREENKIT_NSCH_CONFIG it is skipped.
"""

import os
from pathlib import Path

import numpy as np
import pytest
import yaml
from oracles import brute_knn_impute, central_difference, stepwise_sfs, sweep_auc

from screenkit.cli import main
from screenkit.evaluation import auc_metric, roc_auc
from screenkit.experiments import (
    DataConfig, ExperimentConfig, InspectConfig, SfsConfig, load_config, prepare_cohort, prepare_feature_set,
    run_workflow,
)
from screenkit.feature_selection import retrain_on_subset, sfs_forward
from screenkit.imputation import ImputeConfig, impute_knn, mean_impute
from screenkit.learners import (
    ForestConfig, LinearModel, TrainConfig, TreeConfig, logistic_loss_grad, train_forest, train_logistic, train_tree,
)
from screenkit.report import EvaluationReport, report_json
from screenkit.survey_data import SurveyTable
from screenkit.synthetic import SyntheticSpec
from screenkit.tasks import evaluate_cell


def _table(X, M):
    return SurveyTable(tuple(f"c{j}" for j in range(X.shape[1])), X, M, np.arange(len(X)))


# ------------------------------------------------------------------- A1


def test_a1_auc_oracle_equivalence(acceptance):
    worst = 0.0
    for seed in range(100):
        g = np.random.default_rng(seed)
        n = int(g.integers(2, 501))
        y = g.random(n) < g.uniform(0.05, 0.95)
        y[0], y[-1] = True, False
        s = g.normal(size=n)
        if seed % 2:  # half the instances carry heavy ties
            s = np.round(s, 1)
        worst = max(worst, abs(roc_auc(s, y) - sweep_auc(s, y)))
    example = roc_auc([0.9, 0.3, 0.8, 0.2], [1, 1, 0, 0])
    ok = worst <= 1e-9 and example == 0.75
    acceptance("A1", ok, f"max |rank - sweep| = {worst:.2e} over 100 instances; pair example = {example}")
    assert ok


# ------------------------------------------------------------------- A2


def test_a2_gradient_check(acceptance):
    worst = 0.0
    for seed in range(20):
        g = np.random.default_rng(seed)
        n, p = int(g.integers(5, 51)), int(g.integers(1, 11))
        X = g.normal(size=(n, p)) * g.uniform(0.5, 3, p)
        y = (g.random(n) < 0.4).astype(float)
        lam = float(g.choice([0.0, 1e-4, 0.1]))
        mean, scale = X.mean(axis=0), X.std(axis=0) + 1e-3
        theta = g.normal(size=p + 1)

        def loss(t):
            return logistic_loss_grad(LinearModel(t[:-1], float(t[-1]), mean, scale), X, y, lam)[0]

        _, grad = logistic_loss_grad(LinearModel(theta[:-1], float(theta[-1]), mean, scale), X, y, lam)
        fd = central_difference(loss, theta, h=1e-5)
        rel = np.max(np.abs(grad - fd)) / max(np.max(np.abs(fd)), 1e-12)
        worst = max(worst, rel)
    ok = worst < 1e-5
    acceptance("A2", ok, f"max relative gradient error {worst:.2e} over 20 instances (h=1e-5)")
    assert ok


# ------------------------------------------------------------------- A3


@pytest.mark.slow
def test_a3_binary_vs_fourway_gap(acceptance):
    config = ExperimentConfig(seed=0, tasks=("T2", "T3"), feature_sets=("combined",), learners=("logistic",),
                              data=DataConfig(synthetic=SyntheticSpec(n_rows=20000, seed=0)),
                              sfs=SfsConfig(enabled=False), inspection=InspectConfig(enabled=False), summary=False)
    report = run_workflow(config)
    t2 = report.cell("T2", "combined", "logistic").metrics
    t3 = report.cell("T3", "combined", "logistic").metrics
    checks = {
        "T2 sens >= 0.90": t2.sensitivity >= 0.90,
        "T2 spec >= 0.90": t2.specificity >= 0.90,
        "T3 macro sens in [0.55, 0.80]": 0.55 <= t3.sensitivity <= 0.80,
        "T3 macro spec in [0.55, 0.80]": 0.55 <= t3.specificity <= 0.80,
    }
    failed = [k for k, v in checks.items() if not v]
    detail = (f"T2 sens {t2.sensitivity:.4f} spec {t2.specificity:.4f}; "
              f"T3 macro sens {t3.sensitivity:.4f} spec {t3.specificity:.4f}")
    if failed:
        detail += f"; failing: {', '.join(failed)}"
    acceptance("A3", not failed, detail)
    assert not failed, detail


# ------------------------------------------------------------------- A4


def test_a4_sfs_oracle_equivalence(acceptance):
    def forest_factory(X, y, seed):
        return train_forest(X, y, ForestConfig(n_trees=3, seed=seed, tree=TreeConfig(max_depth=4)), n_classes=2)

    def logistic_factory(X, y, seed):
        return train_logistic(X, y)

    mismatches = 0
    for seed in range(10):
        g = np.random.default_rng(seed)
        p = int(g.integers(4, 9))
        k = int(g.integers(1, min(4, p) + 1))
        X = g.normal(size=(240, p))
        y = (g.random(240) < 1 / (1 + np.exp(-(1.5 * X[:, 0] - X[:, p - 1])))).astype(int)
        Xtr, ytr, Xva, yva = X[:160], y[:160], X[160:], y[160:]
        for factory in (forest_factory, logistic_factory):
            trace = sfs_forward(Xtr, ytr, Xva, yva, factory, k, seed=seed)
            chosen, path = stepwise_sfs(Xtr, ytr, Xva, yva, factory, auc_metric, k, seed)
            same = trace.indices == chosen and [s for _, s in trace.steps] == [s for _, s in path]
            mismatches += int(not same)
    ok = mismatches == 0
    acceptance("A4", ok, f"{20 - mismatches}/20 traces (10 seeds x forest, logistic) equal the step-wise oracle")
    assert ok


# ------------------------------------------------------------------- A5


def test_a5_imputation_oracle_and_quality(acceptance):
    exact = 0
    for seed in range(10):
        g = np.random.default_rng(seed)
        n, p = int(g.integers(100, 201)), int(g.integers(3, 8))
        X = g.integers(0, 5, (n, p)).astype(float)
        M = g.random((n, p)) < 0.2
        M[M.all(axis=1), 0] = False
        got = impute_knn(_table(X, M), ImputeConfig(k=5), donor_rows=None).values
        exact += int(np.array_equal(got, brute_knn_impute(X, M, 5)))

    wins = 0
    for seed in range(20):
        g = np.random.default_rng(100 + seed)
        n, p = 400, 6
        z = g.normal(size=(n, 1))
        X = z @ g.uniform(0.7, 1.3, (1, p)) + 0.4 * g.normal(size=(n, p))
        M = g.random((n, p)) < 0.10
        M[M.all(axis=1), 0] = False
        t = _table(X, M)
        knn = impute_knn(t, ImputeConfig(k=5)).values[M]
        mean = mean_impute(t).values[M]
        truth = X[M]
        wins += int(np.sqrt(np.mean((knn - truth) ** 2)) < np.sqrt(np.mean((mean - truth) ** 2)))
    ok = exact == 10 and wins >= 18
    acceptance("A5", ok, f"oracle exact on {exact}/10 tables (n 100-200); kNN RMSE below mean RMSE in {wins}/20 seeds")
    assert ok


# ------------------------------------------------------------------- A6


def test_a6_reduction_identities(acceptance):
    forest_same = 0
    for seed in range(8):
        g = np.random.default_rng(seed)
        X = np.round(g.normal(size=(200, 5)), 1)
        y = (X[:, 0] + X[:, 1] * X[:, 2] + 0.5 * g.normal(size=200) > 0).astype(int)
        cfg = TreeConfig(max_depth=int(g.integers(1, 8)), min_samples_leaf=int(g.integers(1, 10)))
        forest = train_forest(X, y, ForestConfig(n_trees=1, mtry=None, bootstrap=False, seed=seed, tree=cfg))
        tree = train_tree(X, y, cfg)
        t0 = forest.trees[0]
        forest_same += int(np.array_equal(forest.predict_proba(X), tree.predict_proba(X))
                           and np.array_equal(t0.feature, tree.feature)
                           and np.array_equal(t0.threshold, tree.threshold))

    config = ExperimentConfig(data=DataConfig(synthetic=SyntheticSpec(n_rows=1500, seed=4)),
                              train=TrainConfig(forest=ForestConfig(n_trees=5)))
    cohort = prepare_cohort(config)
    cells_same, n_cells = 0, 0
    for fs in ("group1", "combined"):
        data = prepare_feature_set(cohort, fs)
        sub = retrain_on_subset(data, list(data.feature_names), ("T1", "T2", "T3"), ("logistic", "tree", "forest"),
                                config.train, config.seed, feature_set=fs)
        for cell in sub.cells:
            full = evaluate_cell(data, cell.task, cell.learner, config.train, config.seed)
            n_cells += 1
            # compared as serialised report entries (NaN rates become null)
            cells_same += int(report_json(EvaluationReport(cells=[full])) == report_json(EvaluationReport(cells=[cell])))
    ok = forest_same == 8 and cells_same == n_cells
    acceptance("A6", ok, f"forest(1, no bootstrap, all features) == tree on {forest_same}/8 fixtures; "
                         f"subset=all retrain == full on {cells_same}/{n_cells} cells")
    assert ok


# ------------------------------------------------------------------- A7


def test_a7_determinism(acceptance, tmp_path):
    cfg = tmp_path / "small.yaml"
    cfg.write_text(yaml.safe_dump({
        "seed": 3,
        "data": {"synthetic": {"n_rows": 1000}},
        "train": {"forest": {"n_trees": 6}},
        "sfs": {"k": 3, "n_trees": 4},
        "inspection": {"n_repeats": 2, "pd_features": 2},
    }))
    runs = {}
    for name, threads in (("a", 1), ("b", 1), ("c", 4)):
        out = tmp_path / name
        assert main(["run", "--config", str(cfg), "--threads", str(threads), "--out", str(out)]) == 0
        runs[name] = {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*"))
                      if p.is_file() and p.name != "run_meta.json"}
    same_runs = runs["a"] == runs["b"]
    same_threads = runs["a"] == runs["c"]
    ok = same_runs and same_threads and Path("report.json") in runs["a"]
    acceptance("A7", ok, f"{len(runs['a'])} report files; two runs identical: {same_runs}; "
                         f"1 vs 4 threads identical: {same_threads}")
    assert ok


# ------------------------------------------------------------------- A8

A8_TARGETS = {"accuracy": 0.9380, "sensitivity": 0.9360, "specificity": 0.9404}


def test_a8_real_data(acceptance):
    path = os.environ.get("SCREENKIT_NSCH_CONFIG")
    if not path:
        acceptance("A8", None, "SCREENKIT_NSCH_CONFIG not set; real survey files unavailable at desk scale")
        pytest.skip("SCREENKIT_NSCH_CONFIG not set")
    base = load_config(path)
    config = ExperimentConfig.from_dict({**base.to_dict(), "tasks": ["T1", "T3"], "feature_sets": ["combined"],
                                         "learners": ["logistic"], "sfs": {"enabled": False},
                                         "inspection": {"enabled": False}})
    report = run_workflow(config)
    t1 = report.cell("T1", "combined", "logistic").metrics
    t3 = report.cell("T3", "combined", "logistic").metrics
    checks = {f"T1 {k}": abs(getattr(t1, k) - v) <= 0.03 for k, v in A8_TARGETS.items()}
    checks["T1 AUC"] = abs(t1.roc_auc - 0.94) <= 0.03
    checks["T3 autism AUC"] = abs(t3.roc_auc["autism"] - 0.83) <= 0.05
    checks["T3 ADHD AUC"] = abs(t3.roc_auc["adhd"] - 0.73) <= 0.05
    failed = [k for k, v in checks.items() if not v]
    detail = (f"T1 acc {t1.accuracy:.4f} sens {t1.sensitivity:.4f} spec {t1.specificity:.4f} AUC {t1.roc_auc:.4f}; "
              f"T3 AUC autism {t3.roc_auc['autism']:.4f} adhd {t3.roc_auc['adhd']:.4f}")
    if failed:
        detail += f"; failing: {', '.join(failed)}"
    acceptance("A8", not failed, detail)
    assert not failed, detail
