"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime
failure.  Errors print one ``error: <category>: <detail>`` line on stderr.
Every file lands under the output directory (``--out``, else the config's
``output_dir``); files written by a failing command are removed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import yaml

from .evaluation import binary_report, multilabel_report
from .errors import ConfigError, DataError, ScreenkitError
from .experiments import (
    DEFAULT_SEED, FEATURE_SETS, ExperimentConfig, prepare_cohort, prepare_feature_set,
    run_meta, run_workflow, select_for_task,
)
from .learners import LEARNERS
from .learners.io import load_model, save_model
from .learners.multilabel import MultilabelModel
from .report import FORMATS, emit_report, report_json
from .survey_data import CLASS4_NAMES, dump_codebook, summarize_cohort
from .synthetic import generate_synthetic, write_synthetic_csv
from .tasks import TASKS, evaluate_cell

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4
COMMANDS = ("ingest", "summarize", "synth", "train", "select", "evaluate", "run", "report")


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so usage errors map to exit 2."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _formatter(prog):
    return argparse.HelpFormatter(prog, width=100, max_help_position=32)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, formatter_class=_formatter)
    g = common.add_argument_group("common options")
    g.add_argument("--config", metavar="PATH", help="experiment config (YAML); defaults apply when omitted")
    g.add_argument("--seed", type=int, metavar="INT", help="root seed; overrides the config value")
    g.add_argument("--out", metavar="DIR", help="output directory; overrides the config output_dir")
    g.add_argument("--format", metavar="LIST", default=",".join(FORMATS),
                   help="comma-separated report formats among json,tsv,txt (default: all)")
    g.add_argument("--threads", type=int, metavar="N", help="cap on worker threads (default: config value)")

    parser = _Parser(prog="screenkit", formatter_class=_formatter,
                     description="Survey-based autism/ADHD screening workflow.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("ingest", parents=[common], formatter_class=_formatter,
                       help="load survey files, decode codes, drop rows with missing targets")
    p.add_argument("--input", action="append", metavar="PATH[:YEAR]", default=None,
                   help="survey file, optionally tagged with its year; repeatable; overrides config data.files")
    p.add_argument("--codebook", metavar="PATH", help="codebook YAML; overrides config data.codebook")

    p = sub.add_parser("summarize", parents=[common], formatter_class=_formatter,
                       help="descriptive statistics per diagnosis class")
    p.add_argument("--input", action="append", metavar="PATH[:YEAR]", default=None, help="as for ingest")
    p.add_argument("--codebook", metavar="PATH", help="as for ingest")

    p = sub.add_parser("synth", parents=[common], formatter_class=_formatter,
                       help="write a synthetic cohort as a raw survey file plus its codebook")
    p.add_argument("--rows", type=int, metavar="N", help="number of rows (default: config data.synthetic.n_rows)")

    p = sub.add_parser("train", parents=[common], formatter_class=_formatter,
                       help="train and evaluate one (task, feature set, learner) cell")
    p.add_argument("--task", choices=TASKS, default="T1", help="task (default: T1)")
    p.add_argument("--feature-set", choices=FEATURE_SETS, default="combined", help="feature set (default: combined)")
    p.add_argument("--learner", choices=LEARNERS, default="logistic", help="learner (default: logistic)")

    p = sub.add_parser("select", parents=[common], formatter_class=_formatter,
                       help="sequential forward selection on the training/validation partitions")
    p.add_argument("--task", choices=TASKS, default="T1", help="task (default: T1)")
    p.add_argument("--k", type=int, metavar="N", help="features to select (default: config sfs.k)")

    p = sub.add_parser("evaluate", parents=[common], formatter_class=_formatter,
                       help="score a saved model on the test partition")
    p.add_argument("--model", required=True, metavar="PATH", help="model JSON written by train")
    p.add_argument("--task", choices=TASKS, default="T1", help="task (default: T1)")
    p.add_argument("--feature-set", choices=FEATURE_SETS, default="combined", help="feature set (default: combined)")

    sub.add_parser("run", parents=[common], formatter_class=_formatter, help="run the full workflow and write the report")

    p = sub.add_parser("report", parents=[common], formatter_class=_formatter,
                       help="re-render summary and plot files from a report.json")
    p.add_argument("--input", required=True, metavar="PATH", help="report.json to render")
    return parser


def help_text() -> str:
    """Top-level help followed by every subcommand's help."""
    parser = build_parser()
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    parts = [parser.format_help()]
    for name in COMMANDS:
        parts.append(f"---- {name}\n" + sub.choices[name].format_help())
    return "\n".join(parts)


# ------------------------------------------------------------------ helpers


class _Outputs:
    """Tracks files written by one command so a failure can remove them."""

    def __init__(self, root: Path):
        self.root = root
        self.paths: list[Path] = []

    def path(self, name: str) -> Path:
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise DataError(f"cannot create output directory {self.root}: {exc}") from None
        p = self.root / name
        p.parent.mkdir(parents=True, exist_ok=True)
        self.paths.append(p)
        return p

    def write_text(self, name: str, text: str) -> Path:
        p = self.path(name)
        try:
            p.write_text(text)
        except OSError as exc:
            raise DataError(f"cannot write {p}: {exc}") from None
        return p

    def write_json(self, name: str, obj) -> Path:
        return self.write_text(name, report_json(obj))

    def cleanup(self) -> None:
        for p in reversed(self.paths):
            try:
                p.unlink()
            except OSError:
                pass


def _load_raw_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a mapping")
    return doc


def resolve_config(args) -> tuple[ExperimentConfig, str]:
    """Config with CLI overrides applied, and where the seed came from."""
    raw = _load_raw_config(args.config)
    config = ExperimentConfig.from_dict(raw)
    if args.seed is not None:
        config, source = replace(config, seed=args.seed), "cli"
    elif "seed" in raw:
        source = "config"
    else:
        config, source = replace(config, seed=DEFAULT_SEED), "default"
    if args.out is not None:
        config = replace(config, output_dir=args.out)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        config = replace(config, threads=args.threads)
    inputs = getattr(args, "input", None)
    if args.command in ("ingest", "summarize") and (inputs or getattr(args, "codebook", None)):
        data = config.data
        files = data.files
        if inputs:
            files = tuple((p.rsplit(":", 1)[0], p.rsplit(":", 1)[1]) if ":" in p else (p, None) for p in inputs)
        config = replace(config, data=replace(data, source="files", files=files,
                                              codebook=args.codebook or data.codebook))
    return config, source


def _formats(text: str) -> tuple[str, ...]:
    formats = tuple(f.strip() for f in text.split(",") if f.strip())
    bad = [f for f in formats if f not in FORMATS]
    if bad or not formats:
        raise ConfigError(f"--format: unknown format(s) {bad} (choose from {', '.join(FORMATS)})")
    return formats


def _cohort_frame_rows(cohort) -> list[list[str]]:
    t = cohort.table
    rows = [["row_id", "class4", *t.columns]]
    cls = cohort.labels.class4
    for i in range(t.n_rows):
        vals = ["" if t.missing_mask[i, j] else repr(float(t.values[i, j])) for j in range(len(t.columns))]
        rows.append([str(int(t.row_ids[i])), CLASS4_NAMES[int(cls[i])], *vals])
    return rows


def _tsv(rows) -> str:
    return "".join("\t".join(str(c) for c in r) + "\n" for r in rows)


# ----------------------------------------------------------------- commands


def cmd_ingest(args, config, seed_source, out: _Outputs) -> None:
    cohort = prepare_cohort(config)
    out.write_text("cohort.tsv", _tsv(_cohort_frame_rows(cohort)))
    out.write_json("ingest.json", {
        "n_loaded": cohort.n_loaded,
        "n_complete_targets": cohort.table.n_rows,
        "load": cohort.load_report.to_dict() if cohort.load_report is not None else None,
        "split": {"train": len(cohort.split.train), "val": len(cohort.split.val), "test": len(cohort.split.test)},
    })


def cmd_summarize(args, config, seed_source, out: _Outputs) -> None:
    cohort = prepare_cohort(config)
    summary = summarize_cohort(cohort.table, cohort.labels)
    out.write_text("cohort_summary.tsv", _tsv(summary.to_rows()))
    out.write_json("cohort_summary.json", summary.to_dict())


def cmd_synth(args, config, seed_source, out: _Outputs) -> None:
    spec = config.data.synthetic
    if args.rows is not None:
        spec = replace(spec, n_rows=args.rows)
    if seed_source == "cli":
        spec = replace(spec, seed=config.seed)
    table, _ = generate_synthetic(spec)
    write_synthetic_csv(table, out.path("synthetic.csv"), seed=spec.seed)
    dump_codebook(table.codebook, out.path("codebook.yaml"))
    out.write_text("synthetic_spec.yaml", yaml.safe_dump(spec.to_dict(), sort_keys=False))


def cmd_train(args, config, seed_source, out: _Outputs) -> None:
    cohort = prepare_cohort(config)
    data = prepare_feature_set(cohort, args.feature_set, config.impute)
    cell = evaluate_cell(data, args.task, args.learner, config.train, config.seed, config.threads)
    if cell.status != "ok":
        raise DataError(cell.reason)
    save_model(cell.model, out.path("model.json"))
    out.write_json("cell.json", cell.to_dict())


def cmd_select(args, config, seed_source, out: _Outputs) -> None:
    sfs = config.sfs if args.k is None else replace(config.sfs, k=args.k)
    cohort = prepare_cohort(config)
    data = prepare_feature_set(cohort, sfs.feature_set, config.impute)
    trace = select_for_task(data, args.task, sfs, config.train, config.seed, config.threads)
    out.write_json(f"selection_{args.task}.json", {"task": args.task, "feature_set": data.name, **trace.to_dict()})


def cmd_evaluate(args, config, seed_source, out: _Outputs) -> None:
    try:
        model = load_model(args.model)
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot load model {args.model}: {exc}") from None
    cohort = prepare_cohort(config)
    data = prepare_feature_set(cohort, args.feature_set, config.impute)
    X, y = data.partition(args.task, "test")
    if X.shape[1] != model.n_features:
        raise DataError(f"model expects {model.n_features} features, feature set has {X.shape[1]}")
    if args.task == "T3":
        if not isinstance(model, MultilabelModel):
            raise DataError("task T3 needs a multilabel model")
        metrics, cm = multilabel_report(y, model.head_proba(X))
    else:
        if isinstance(model, MultilabelModel):
            raise DataError(f"task {args.task} needs a binary model")
        metrics, cm = binary_report(y, model.predict_proba(X)[:, 1])
    out.write_json("evaluation.json", {"task": args.task, "feature_set": data.name, "n_test": len(X),
                                       "metrics": metrics.to_dict(), "confusion": cm.to_dict()})


def cmd_run(args, config, seed_source, out: _Outputs) -> None:
    started = datetime.now(timezone.utc)
    report = run_workflow(config)
    formats = _formats(args.format)
    out.paths.extend(emit_report(report, out.root, formats))
    out.write_text("run_meta.json", json.dumps(run_meta(report, seed_source, started, str(out.root)), indent=2, sort_keys=True) + "\n")


def cmd_report(args, config, seed_source, out: _Outputs) -> None:
    try:
        doc = json.loads(Path(args.input).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read report {args.input}: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != "screenkit-report":
        raise DataError(f"{args.input} is not a screenkit report")
    out.paths.extend(emit_report(doc, out.root, _formats(args.format)))


HANDLERS = {
    "ingest": cmd_ingest, "summarize": cmd_summarize, "synth": cmd_synth, "train": cmd_train,
    "select": cmd_select, "evaluate": cmd_evaluate, "run": cmd_run, "report": cmd_report,
}


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, DataError):
        return EXIT_DATA
    return EXIT_RUNTIME


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    out = None
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help
            return int(exc.code or 0)
        config, seed_source = resolve_config(args)
        _formats(args.format)
        out = _Outputs(Path(config.output_dir))
        HANDLERS[args.command](args, config, seed_source, out)
        return EXIT_OK
    except Exception as exc:  # everything maps to an exit code
        if out is not None:
            out.cleanup()
        category = exc.category if isinstance(exc, ScreenkitError) else "runtime"
        detail = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {category}: {detail}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
