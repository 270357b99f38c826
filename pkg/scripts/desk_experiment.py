"""Full workflow on the default synthetic cohort (desk scale).

Writes report.json, summary.txt/tsv, plot_data/ and run_meta.json under
the output directory.  Takes several minutes on one core, most of it in
forward selection with forests.
"""

import argparse
import json
import time
from dataclasses import replace
from datetime import datetime, timezone

from screenkit.experiments import load_config, run_meta, run_workflow
from screenkit.report import emit_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="configs/default.yaml")
    ap.add_argument("--out", default="results/desk")
    ap.add_argument("--rows", type=int, help="override data.synthetic.n_rows")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    config = load_config(args.config)
    if args.rows:
        config = replace(config, data=replace(config.data, synthetic=replace(config.data.synthetic, n_rows=args.rows)))
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    report = run_workflow(config, threads=args.threads)
    emit_report(report, args.out)
    with open(f"{args.out}/run_meta.json", "w") as fh:
        json.dump(run_meta(report, "config", started, args.out), fh, indent=2, sort_keys=True)
    print(open(f"{args.out}/summary.txt").read())
    print(f"done in {time.perf_counter() - t0:.1f}s -> {args.out}")


if __name__ == "__main__":
    main()
