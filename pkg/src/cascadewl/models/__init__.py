"""Classifiers: logistic regression, boosted trees, threshold and no-information baselines."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ._common import TrainingDataError, as_matrix, sample_weights
from .baselines import (
    NoInfoModel, ThresholdModel, candidate_thresholds, noinfo_expected_f1,
    noinfo_simulated_f1, noinfo_train, threshold_train,
)
from .gbt import GBTModel, Tree, gbt_train
from .linear import LinearModel, logistic_loss_grad, logreg_train, sigmoid

MODEL_FORMAT = "cascadewl-model"
MODEL_VERSION = 1


def predict(model, X, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(labels, scores)``. Scores are probabilities (threshold model: the raw value)."""
    if isinstance(model, (LinearModel, GBTModel)):
        scores = model.predict_proba(X)
        return (scores >= model.decision_threshold).astype(np.int64), scores
    if isinstance(model, ThresholdModel):
        v = np.asarray(X, dtype=np.float64)
        if v.ndim == 2:
            v = v[:, 0 if model.column is None else model.column]
        return model.predict(v), v
    if isinstance(model, NoInfoModel):
        n = X if isinstance(X, (int, np.integer)) else as_matrix(X).shape[0]
        return model.predict(int(n), seed), np.full(int(n), model.q)
    raise TypeError(f"unsupported model type {type(model).__name__}")


def _num(x: float):
    # JSON has no infinities; float("inf") parses these back
    x = float(x)
    return x if np.isfinite(x) else ("inf" if x > 0 else "-inf")


def model_to_dict(model) -> dict:
    if isinstance(model, LinearModel):
        nz = np.flatnonzero(model.weights)
        params = {
            "dim": int(model.weights.size),
            "weights": [[int(i), float(model.weights[i])] for i in nz],
            "bias": model.bias, "l2_lambda": model.l2_lambda,
            "decision_threshold": _num(model.decision_threshold),
            "n_iter": model.n_iter, "converged": model.converged,
        }
        kind = "linear"
    elif isinstance(model, GBTModel):
        params = {
            "base_score": model.base_score, "learning_rate": model.learning_rate,
            "n_trees": model.n_trees, "max_leaves": model.max_leaves,
            "min_samples_leaf": model.min_samples_leaf, "l2": model.l2, "n_bins": model.n_bins,
            "decision_threshold": _num(model.decision_threshold),
            "trees": [
                {"feature": t.feature.tolist(), "threshold": t.threshold.tolist(),
                 "left": t.left.tolist(), "right": t.right.tolist(), "value": t.value.tolist()}
                for t in model.trees
            ],
        }
        kind = "gbt"
    elif isinstance(model, ThresholdModel):
        params = {"attribute": model.attribute, "threshold": _num(model.threshold),
                  "train_f1": model.train_f1, "column": model.column}
        kind = "threshold"
    elif isinstance(model, NoInfoModel):
        params = {"q": model.q, "expected_f1": model.expected_f1}
        kind = "noinfo"
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    return {"format": MODEL_FORMAT, "version": MODEL_VERSION, "kind": kind, "params": params}


def model_from_dict(obj: dict):
    if obj.get("format") != MODEL_FORMAT:
        raise ValueError("not a cascadewl model file")
    if obj.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {obj.get('version')}")
    kind, p = obj["kind"], obj["params"]
    if kind == "linear":
        w = np.zeros(p["dim"])
        for i, v in p["weights"]:
            w[i] = v
        return LinearModel(w, p["bias"], p["l2_lambda"], float(p["decision_threshold"]), p["n_iter"], p["converged"])
    if kind == "gbt":
        trees = [Tree(np.asarray(t["feature"], dtype=np.int64), np.asarray(t["threshold"], dtype=float),
                      np.asarray(t["left"], dtype=np.int64), np.asarray(t["right"], dtype=np.int64),
                      np.asarray(t["value"], dtype=float)) for t in p["trees"]]
        return GBTModel(trees, p["base_score"], p["learning_rate"], p["n_trees"], p["max_leaves"],
                        p["min_samples_leaf"], p["l2"], p["n_bins"], float(p["decision_threshold"]))
    if kind == "threshold":
        return ThresholdModel(p["attribute"], float(p["threshold"]), p["train_f1"], p["column"])
    if kind == "noinfo":
        return NoInfoModel(p["q"], p["expected_f1"])
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path: str | Path, meta: dict | None = None) -> None:
    obj = model_to_dict(model)
    if meta:
        obj["meta"] = meta
    Path(path).write_text(json.dumps(obj, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def load_model(path: str | Path):
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


__all__ = [
    "GBTModel", "LinearModel", "NoInfoModel", "ThresholdModel", "TrainingDataError", "Tree",
    "candidate_thresholds", "gbt_train", "load_model", "logistic_loss_grad", "logreg_train",
    "model_from_dict", "model_to_dict", "noinfo_expected_f1", "noinfo_simulated_f1", "noinfo_train",
    "predict", "sample_weights", "save_model", "sigmoid", "threshold_train",
]
