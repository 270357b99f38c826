"""Binary vs four-way gap on the planted synthetic cohort.

Trains logistic regression on the imputed combined feature set for the
autism-or-ADHD task (T2) and the multilabel task (T3), then prints the
metrics next to the target bands: T2 sensitivity and specificity >= 0.90,
T3 macro sensitivity and specificity within [0.55, 0.80].
"""

import argparse

from screenkit.experiments import ExperimentConfig, InspectConfig, SfsConfig, run_workflow


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--learner", default="logistic")
    args = ap.parse_args()
    config = ExperimentConfig(seed=args.seed, tasks=("T2", "T3"), feature_sets=("combined",),
                              learners=(args.learner,), sfs=SfsConfig(enabled=False),
                              inspection=InspectConfig(enabled=False), summary=False)
    report = run_workflow(config)
    t2 = report.cell("T2", "combined", args.learner).metrics
    t3 = report.cell("T3", "combined", args.learner).metrics
    rows = [
        ("T2 sensitivity", t2.sensitivity, t2.sensitivity >= 0.90, ">= 0.90"),
        ("T2 specificity", t2.specificity, t2.specificity >= 0.90, ">= 0.90"),
        ("T3 macro sensitivity", t3.sensitivity, 0.55 <= t3.sensitivity <= 0.80, "in [0.55, 0.80]"),
        ("T3 macro specificity", t3.specificity, 0.55 <= t3.specificity <= 0.80, "in [0.55, 0.80]"),
    ]
    for name, value, ok, band in rows:
        print(f"{name:22s} {value:.4f}  target {band:16s} {'PASS' if ok else 'FAIL'}")
    print("T3 per class (recall, specificity):")
    for cls, (r, s) in t3.per_class.items():
        print(f"  {cls:10s} {r:.3f} {s:.3f}")


if __name__ == "__main__":
    main()
