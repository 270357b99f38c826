"""Evaluation report model and emission.

``report.json`` is the structured record.  Everything else is derived from
it: ``summary.tsv`` (one row per cell), ``summary.txt`` (task-by-feature-set
grids) and plot-data TSV files (selection curves, importances, partial
dependence, confusion matrices).  Nothing nondeterministic (timings, host)
goes into these files.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import DataError
from .tasks import TASK_TITLES, TASKS, Cell

REPORT_FORMAT = "screenkit-report"
REPORT_VERSION = 1
FORMATS = ("json", "tsv", "txt")


@dataclass(eq=False)
class EvaluationReport:
    cells: list[Cell] = field(default_factory=list)
    selection: dict[str, dict] = field(default_factory=dict)
    inspection: dict[str, dict] = field(default_factory=dict)
    cohort_summary: dict | None = None
    data: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    # timings and other run-to-run variation; never serialised into the report
    meta: dict = field(default_factory=dict, repr=False)

    def cell(self, task: str, feature_set: str, learner: str) -> Cell:
        for c in self.cells:
            if c.key == (task, feature_set, learner):
                return c
        raise KeyError((task, feature_set, learner))

    def to_dict(self) -> dict:
        return _clean({
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "config": self.config,
            "data": self.data,
            "cohort_summary": self.cohort_summary,
            "cells": [c.to_dict() for c in self.cells],
            "selection": self.selection,
            "inspection": self.inspection,
        })


def _clean(obj: Any):
    """JSON-safe copy: NaN/inf become None, tuples become lists."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def report_json(report: EvaluationReport | dict) -> str:
    doc = report.to_dict() if isinstance(report, EvaluationReport) else _clean(report)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _auc_text(auc) -> str:
    if isinstance(auc, dict):
        return " / ".join(f"{k}:{_num(v, 3)}" for k, v in auc.items())
    return _num(auc, 3)


def _num(v, digits: int) -> str:
    return "nan" if v is None else f"{v:.{digits}f}"


def _pct(v) -> str:
    return "nan" if v is None else f"{100 * v:.2f}%"


def summary_rows(doc: dict) -> list[list[str]]:
    header = ["task", "feature_set", "learner", "status", "accuracy", "sensitivity", "specificity", "roc_auc"]
    rows = [header]
    for c in doc.get("cells", []):
        if c["status"] != "ok":
            rows.append([c["task"], c["feature_set"], c["learner"], c["status"], "", "", "", ""])
            continue
        m = c["metrics"]
        auc = m["roc_auc"]
        auc_cell = json.dumps(auc, sort_keys=True) if isinstance(auc, dict) else repr(auc)
        rows.append([c["task"], c["feature_set"], c["learner"], "ok", repr(m["accuracy"]), repr(m["sensitivity"]),
                     repr(m["specificity"]), auc_cell])
    return rows


def summary_text(doc: dict) -> str:
    """Per learner, a grid of feature sets x metrics against tasks."""
    cells = [c for c in doc.get("cells", [])]
    if not cells:
        return "(no cells)\n"
    lines = []
    learners = list(dict.fromkeys(c["learner"] for c in cells))
    feature_sets = list(dict.fromkeys(c["feature_set"] for c in cells))
    tasks = [t for t in TASKS if any(c["task"] == t for c in cells)]
    index = {(c["task"], c["feature_set"], c["learner"]): c for c in cells}
    width = 28
    for learner in learners:
        lines.append(f"== learner: {learner}")
        lines.append("".ljust(18) + "metric".ljust(14) + "".join(TASK_TITLES[t][:width - 2].ljust(width) for t in tasks))
        for fs in feature_sets:
            if not any((t, fs, learner) in index for t in tasks):
                continue
            for label, key in (("Accuracy", "accuracy"), ("Sensitivity", "sensitivity"),
                               ("Specificity", "specificity"), ("ROC-AUC", "roc_auc")):
                row = (fs if key == "accuracy" else "").ljust(18) + label.ljust(14)
                for t in tasks:
                    c = index.get((t, fs, learner))
                    if c is None:
                        text = "-"
                    elif c["status"] != "ok":
                        text = "skipped"
                    else:
                        v = c["metrics"][key]
                        text = _auc_text(v) if key == "roc_auc" else _pct(v)
                    row += text.ljust(width)
                lines.append(row.rstrip())
        lines.append("")
    return "\n".join(lines)


def _write_tsv(path: Path, rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerows(rows)


def emit_report(report: EvaluationReport | dict, out_dir: str | Path, formats=FORMATS) -> list[Path]:
    """Write the report files; returns the paths written.

    Every file is rendered from the serialised JSON document, so re-rendering
    a saved report.json reproduces the same bytes.
    """
    text = report_json(report)
    doc = json.loads(text)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise DataError(f"output directory {out} is not writable: {exc}") from None
    unknown = set(formats) - set(FORMATS)
    if unknown:
        raise ValueError(f"unknown report formats {sorted(unknown)}")
    written: list[Path] = []
    if "json" in formats:
        p = out / "report.json"
        p.write_text(text)
        written.append(p)
    if "txt" in formats:
        p = out / "summary.txt"
        p.write_text(summary_text(doc))
        written.append(p)
    if "tsv" in formats:
        p = out / "summary.tsv"
        _write_tsv(p, summary_rows(doc))
        written.append(p)
        plots = out / "plot_data"
        plots.mkdir(exist_ok=True)
        written.extend(_plot_files(doc, plots))
    return written


def _plot_files(doc: dict, plots: Path) -> list[Path]:
    written = []
    for task, trace in sorted(doc.get("selection", {}).items()):
        p = plots / f"sfs_{task}.tsv"
        _write_tsv(p, [["subset_size", "added_feature", "score"]]
                   + [[i + 1, s["feature"], repr(s["score"])] for i, s in enumerate(trace.get("steps", []))])
        written.append(p)
    for key, insp in sorted(doc.get("inspection", {}).items()):
        if "permutation_importance" in insp:
            p = plots / f"importance_{key}.tsv"
            rows = [["feature", "permutation_importance", "permutation_std", "coefficient_abs"]]
            coef = insp.get("coefficient_abs") or {}
            for f, v in insp["permutation_importance"].items():
                rows.append([f, repr(v["mean"]), repr(v["std"]), repr(coef[f]) if f in coef else ""])
            _write_tsv(p, rows)
            written.append(p)
        if "partial_dependence" in insp:
            p = plots / f"pd_{key}.tsv"
            rows = [["feature", "grid_value", "output", "mean_probability"]]
            for f, pdd in insp["partial_dependence"].items():
                for gi, g in enumerate(pdd["grid"]):
                    for name, series in pdd["curves"].items():
                        rows.append([f, repr(g), name, repr(series[gi])])
            _write_tsv(p, rows)
            written.append(p)
    for c in doc.get("cells", []):
        if c["status"] != "ok":
            continue
        p = plots / f"confusion_{c['task']}_{c['feature_set']}_{c['learner']}.tsv"
        labels = c["confusion"]["labels"]
        _write_tsv(p, [["true\\pred", *labels]] + [[l, *row] for l, row in zip(labels, c["confusion"]["counts"])])
        written.append(p)
    return written
