import csv
import json
import re
from pathlib import Path

import pytest
import yaml

from screenkit.cli import COMMANDS, build_parser, help_text, main

GOLDEN = Path(__file__).parent / "golden" / "help.txt"

SMALL = {
    "data": {"synthetic": {"n_rows": 800}},
    "train": {"forest": {"n_trees": 4}},
    "sfs": {"k": 3, "learner": "logistic"},
    "inspection": {"learners": ["logistic"], "n_repeats": 2, "pd_features": 2},
}


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(yaml.safe_dump(SMALL))
    return path


def test_help_matches_golden_file():
    assert help_text() == GOLDEN.read_text()


def test_help_documents_every_flag():
    text = help_text()
    parser = build_parser()
    sub = next(a for a in parser._actions if hasattr(a, "choices") and isinstance(a.choices, dict))
    for name in COMMANDS:
        for action in sub.choices[name]._actions:
            for flag in action.option_strings:
                assert flag in text
            assert action.help, (name, action.dest)


def test_help_exit_zero(capsys):
    assert main(["--help"]) == 0
    assert "usage: screenkit" in capsys.readouterr().out


def test_synth_row_count(tmp_path):
    out = tmp_path / "syn"
    assert main(["synth", "--rows", "1000", "--seed", "1", "--out", str(out)]) == 0
    with open(out / "synthetic.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1001
    spec = yaml.safe_load((out / "synthetic_spec.yaml").read_text())
    assert spec["seed"] == 1 and spec["n_rows"] == 1000


def test_synth_then_ingest_and_summarize(tmp_path):
    syn = tmp_path / "syn"
    assert main(["synth", "--rows", "600", "--seed", "2", "--out", str(syn)]) == 0
    ing = tmp_path / "ing"
    assert main(["ingest", "--input", f"{syn / 'synthetic.csv'}:2021", "--codebook", str(syn / "codebook.yaml"),
                 "--out", str(ing)]) == 0
    info = json.loads((ing / "ingest.json").read_text())
    assert info["n_loaded"] == 600
    assert (ing / "cohort.tsv").read_text().count("\n") == info["n_complete_targets"] + 1
    summ = tmp_path / "sum"
    assert main(["summarize", "--input", str(syn / "synthetic.csv"), "--codebook", str(syn / "codebook.yaml"),
                 "--out", str(summ)]) == 0
    assert (summ / "cohort_summary.tsv").exists()


def test_select_twelve_steps(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(yaml.safe_dump({"data": {"synthetic": {"n_rows": 1500}}, "sfs": {"learner": "logistic"}}))
    out = tmp_path / "sel"
    assert main(["select", "--config", str(cfg), "--task", "T2", "--k", "12", "--out", str(out)]) == 0
    trace = json.loads((out / "selection_T2.json").read_text())
    assert len(trace["steps"]) == 12 and len(set(trace["subset"])) == 12
    assert trace["feature_set"] == "combined"


def test_train_then_evaluate(tmp_path, small_config):
    out = tmp_path / "tr"
    assert main(["train", "--config", str(small_config), "--task", "T3", "--feature-set", "group1",
                 "--learner", "tree", "--out", str(out)]) == 0
    cell = json.loads((out / "cell.json").read_text())
    ev = tmp_path / "ev"
    assert main(["evaluate", "--config", str(small_config), "--model", str(out / "model.json"), "--task", "T3",
                 "--feature-set", "group1", "--out", str(ev)]) == 0
    evaluation = json.loads((ev / "evaluation.json").read_text())
    assert evaluation["metrics"] == cell["metrics"]
    # a multilabel model cannot score a binary task
    assert main(["evaluate", "--config", str(small_config), "--model", str(out / "model.json"), "--task", "T1",
                 "--feature-set", "group1", "--out", str(ev)]) == 3


def test_run_twice_identical_bytes(tmp_path, small_config):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(small_config), "--seed", "7", "--out", str(a)]) == 0
    assert main(["run", "--config", str(small_config), "--seed", "7", "--out", str(b)]) == 0
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file() and p.name != "run_meta.json")
    assert Path("report.json") in files and Path("summary.txt") in files
    for rel in files:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel
    meta = json.loads((a / "run_meta.json").read_text())
    assert meta["seed"] == 7 and meta["seed_source"] == "cli"
    # re-rendering the saved report reproduces the derived files
    c = tmp_path / "c"
    assert main(["report", "--input", str(a / "report.json"), "--out", str(c)]) == 0
    for rel in files:
        assert (a / rel).read_bytes() == (c / rel).read_bytes(), rel


def test_seed_precedence(tmp_path):
    from screenkit.cli import resolve_config
    cfg = tmp_path / "c.yaml"
    cfg.write_text("seed: 5\n")
    parser = build_parser()
    assert resolve_config(parser.parse_args(["run", "--config", str(cfg)]))[0].seed == 5
    assert resolve_config(parser.parse_args(["run", "--config", str(cfg)]))[1] == "config"
    assert resolve_config(parser.parse_args(["run", "--config", str(cfg), "--seed", "9"]))[0].seed == 9
    assert resolve_config(parser.parse_args(["run"]))[1] == "default"


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["run", "--bogus"],
    ["synth", "--rows", "abc"],
    ["run", "--format", "pdf"],
    ["run", "--threads", "0"],
])
def test_usage_errors_exit_two(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)] if argv[0] != "frobnicate" else argv) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and re.match(r"error: config: ", err[0])


def test_bad_config_file_exit_two(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("learners: [svm]\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "svm" in capsys.readouterr().err


def test_template_codebook_refused(tmp_path, capsys):
    code = main(["ingest", "--input", str(tmp_path / "x.csv"), "--codebook", "configs/nsch_codebook_template.yaml",
                 "--out", str(tmp_path / "o")])
    assert code == 2
    assert "FILL_ME" in capsys.readouterr().err


def test_missing_input_file_exit_three_and_cleanup(tmp_path, capsys):
    syn = tmp_path / "syn"
    assert main(["synth", "--rows", "50", "--out", str(syn)]) == 0
    out = tmp_path / "o"
    code = main(["ingest", "--input", str(tmp_path / "missing.csv"), "--codebook", str(syn / "codebook.yaml"),
                 "--out", str(out)])
    assert code == 3
    assert capsys.readouterr().err.startswith("error: data: ")
    assert not out.exists() or not any(p.is_file() for p in out.rglob("*"))


def test_report_rejects_foreign_json(tmp_path):
    f = tmp_path / "x.json"
    f.write_text('{"hello": 1}')
    assert main(["report", "--input", str(f), "--out", str(tmp_path / "o")]) == 3
