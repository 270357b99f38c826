"""Versioned JSON serialization of trained models.

Floats are written with Python's shortest round-trip repr, so weights and
tree thresholds survive a save/load cycle bit-for-bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .forest import Forest
from .logistic import LinearModel
from .multilabel import MultilabelModel
from .tree import LEAF, Tree

FORMAT = "screenkit-model"
VERSION = 1


def _floats(a) -> list[float]:
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def _tree_to_dict(tree: Tree) -> dict:
    def node(i: int) -> dict:
        d = {"id": i, "value": _floats(tree.value[i])}
        if tree.left[i] != LEAF:
            d.update(feature=int(tree.feature[i]), threshold=float(tree.threshold[i]),
                     left=node(int(tree.left[i])), right=node(int(tree.right[i])))
        return d

    return {"kind": "tree", "n_features": tree.n_features, "n_classes": tree.n_classes,
            "n_nodes": tree.n_nodes, "root": node(0)}


def _tree_from_dict(d: dict) -> Tree:
    n, c = int(d["n_nodes"]), int(d["n_classes"])
    feature = np.full(n, -1, dtype=np.int64)
    threshold = np.zeros(n)
    left = np.full(n, LEAF, dtype=np.int64)
    right = np.full(n, LEAF, dtype=np.int64)
    value = np.zeros((n, c))
    stack = [d["root"]]
    while stack:
        nd = stack.pop()
        i = int(nd["id"])
        value[i] = nd["value"]
        if "left" in nd:
            feature[i] = int(nd["feature"])
            threshold[i] = float(nd["threshold"])
            left[i], right[i] = int(nd["left"]["id"]), int(nd["right"]["id"])
            stack.extend([nd["left"], nd["right"]])
    return Tree(feature, threshold, left, right, value, int(d["n_features"]))


def model_to_dict(model) -> dict:
    if isinstance(model, LinearModel):
        return {"kind": "logistic", "weights": _floats(model.weights), "bias": float(model.bias),
                "mean": _floats(model.mean), "scale": _floats(model.scale),
                "n_iter": model.n_iter, "converged": model.converged}
    if isinstance(model, Tree):
        return _tree_to_dict(model)
    if isinstance(model, Forest):
        return {"kind": "forest", "root_seed": model.root_seed, "tree_seeds": list(model.tree_seeds),
                "mtry": model.mtry, "bootstrap": model.bootstrap,
                "trees": [_tree_to_dict(t) for t in model.trees]}
    if isinstance(model, MultilabelModel):
        return {"kind": "multilabel", "asd_head": model_to_dict(model.asd_head),
                "adhd_head": model_to_dict(model.adhd_head)}
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "logistic":
        return LinearModel(np.asarray(d["weights"], float), float(d["bias"]), np.asarray(d["mean"], float),
                           np.asarray(d["scale"], float), int(d.get("n_iter", 0)), bool(d.get("converged", False)))
    if kind == "tree":
        return _tree_from_dict(d)
    if kind == "forest":
        return Forest([_tree_from_dict(t) for t in d["trees"]], [int(s) for s in d["tree_seeds"]],
                      int(d["mtry"]), int(d["root_seed"]), bool(d["bootstrap"]))
    if kind == "multilabel":
        return MultilabelModel(model_from_dict(d["asd_head"]), model_from_dict(d["adhd_head"]))
    raise ConfigError(f"unknown model kind {kind!r}")


def dumps(model) -> str:
    return json.dumps({"format": FORMAT, "version": VERSION, "model": model_to_dict(model)}, sort_keys=True)


def loads(text: str):
    doc = json.loads(text)
    if doc.get("format") != FORMAT:
        raise ConfigError("not a screenkit model file")
    if doc.get("version") != VERSION:
        raise ConfigError(f"unsupported model format version {doc.get('version')}")
    return model_from_dict(doc["model"])


def save_model(model, path: str | Path) -> None:
    Path(path).write_text(dumps(model))


def load_model(path: str | Path):
    return loads(Path(path).read_text())
