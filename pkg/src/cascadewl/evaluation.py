"""Rumor-grouped evaluation: splits, cross-validated grids, repeated trials, sweeps."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import __version__
from .attributes import ATTRIBUTE_NAMES, attribute_matrix
from .cascades import LabeledDataset, RawCascade, truncate_by_depth, truncate_by_time
from .metrics import Confusion, confusion, f1
from .models import gbt_train, logreg_train, noinfo_train, predict, threshold_train
from .tagging import TagScheme, apply_tags
from .wl import WLConfig, embed_dataset

LINEAR_GRID = ({"l2_lambda": 1e-3}, {"l2_lambda": 1e-2}, {"l2_lambda": 1e-1})
GBT_GRID = (
    {"n_trees": 150, "learning_rate": 0.15, "max_leaves": 4, "min_samples_leaf": 10},
    {"n_trees": 150, "learning_rate": 0.15, "max_leaves": 8, "min_samples_leaf": 10},
)
FAMILIES = ("wl-lin", "wl-nonlin", "features-lin", "features-nonlin", "noinfo")


class EmptyDatasetError(ValueError):
    """No usable cascades (or only one class) remain after filtering."""


@dataclass(frozen=True)
class SplitPlan:
    seed: int = 0
    test_fraction: float = 0.2
    folds: int = 5


@dataclass(frozen=True)
class ExperimentConfig:
    min_cascade_size: int = 600
    tags: str = "graph"
    model: str = "wl-nonlin"
    wl_h: int = 2
    neighborhood: str = "undirected"
    n_trials: int = 100
    seed: int = 0
    test_fraction: float = 0.2
    folds: int = 5
    grid: tuple[dict, ...] | None = None
    truncate_hours: float | None = None
    truncate_depth: int | None = None
    threads: int = 1

    def __post_init__(self):
        check_model_name(self.model)
        if self.grid is not None:
            if not self.grid:
                raise ValueError("hyperparameter grid must not be empty")
            object.__setattr__(self, "grid", tuple(dict(g) for g in self.grid))
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")

    def resolved_grid(self) -> tuple[dict, ...]:
        if self.grid is not None:
            return self.grid
        return default_grid(self.model)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("threads")  # output does not depend on it
        d["grid"] = [dict(g) for g in self.resolved_grid()]
        if d["truncate_hours"] is not None:
            d["truncate_hours"] = _finite_or_str(d["truncate_hours"])
        return d


def check_model_name(model: str) -> None:
    if model.startswith("attribute:"):
        name = model.split(":", 1)[1]
        if name not in ATTRIBUTE_NAMES:
            raise ValueError(f"unknown attribute {name!r}")
    elif model not in FAMILIES:
        raise ValueError(f"unknown model {model!r}; expected one of {FAMILIES} or attribute:<name>")


def default_grid(model: str) -> tuple[dict, ...]:
    if model.endswith("-lin"):
        return LINEAR_GRID
    if model.endswith("-nonlin"):
        return GBT_GRID
    return ({},)


def config_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


def derive_seed(master: int, *stream: int) -> int:
    return int(np.random.SeedSequence([master & 0xFFFFFFFFFFFFFFFF, *stream]).generate_state(1)[0])


# --- splitting -----------------------------------------------------------


def _rumor_order(rumor_ids: Sequence[str], seed: int) -> list[str]:
    rumors = sorted(set(rumor_ids))
    perm = np.random.default_rng(seed).permutation(len(rumors))
    return [rumors[i] for i in perm]


def split_indices(rumor_ids: Sequence[str], plan: SplitPlan) -> tuple[np.ndarray, np.ndarray]:
    """Row indices of (train, test); every rumor falls entirely on one side."""
    rumors = _rumor_order(rumor_ids, plan.seed)
    if len(rumors) < 2:
        raise ValueError("need at least 2 rumors to split")
    n_test = min(max(1, int(round(plan.test_fraction * len(rumors)))), len(rumors) - 1)
    test_rumors = set(rumors[:n_test])
    is_test = np.array([r in test_rumors for r in rumor_ids])
    return np.flatnonzero(~is_test), np.flatnonzero(is_test)


def stratified_split(ds: LabeledDataset, plan: SplitPlan) -> tuple[LabeledDataset, LabeledDataset]:
    tr, te = split_indices(ds.rumor_ids, plan)
    return ds.subset(tr), ds.subset(te)


def rumor_folds(rumor_ids: Sequence[str], k: int, seed: int) -> list[np.ndarray]:
    """``k`` validation index sets, rumors dealt round-robin after shuffling."""
    rumors = _rumor_order(rumor_ids, seed)
    k = max(2, min(k, len(rumors)))
    fold_of = {r: i % k for i, r in enumerate(rumors)}
    fid = np.array([fold_of[r] for r in rumor_ids])
    return [np.flatnonzero(fid == i) for i in range(k)]


# --- model fitting -------------------------------------------------------


def fit_model(model: str, X, y, params: dict, seed: int = 0):
    if model.endswith("-lin"):
        return logreg_train(X, y, seed=seed, **params)
    if model.endswith("-nonlin"):
        return gbt_train(X, y, class_weights="balanced", seed=seed, **params)
    raise ValueError(f"{model} has no trainable hyperparameters")


@dataclass
class CVResult:
    params: dict
    decision_threshold: float
    mean_f1: float
    grid_scores: list[float]


def cross_validate(X, y, rumor_ids: Sequence[str], model: str, grid: Sequence[dict], plan: SplitPlan) -> CVResult:
    """Pick the grid point with the best mean validation F1 over rumor-grouped folds.

    For each grid point, out-of-fold scores are pooled to choose the score
    cut-off that maximizes F1; per-fold F1 at that cut-off is then averaged.
    The first grid point wins ties.
    """
    y = np.asarray(y)
    folds = rumor_folds(rumor_ids, plan.folds, plan.seed)
    best: CVResult | None = None
    scores = []
    for params in grid:
        oof = np.zeros(y.size)
        for val in folds:
            tr = np.setdiff1d(np.arange(y.size), val, assume_unique=True)
            if np.unique(y[tr]).size < 2:
                oof[val] = y[tr].mean()
                continue
            m = fit_model(model, X[tr], y[tr], params, plan.seed)
            oof[val] = m.predict_proba(X[val])
        cut = threshold_train(oof, y).threshold
        fold_f1 = [f1(oof[v] >= cut, y[v]) for v in folds]
        mean = float(np.mean(fold_f1))
        scores.append(mean)
        if best is None or mean > best.mean_f1:
            best = CVResult(dict(params), cut, mean, scores)
    best.grid_scores = scores
    return best


# --- data preparation ----------------------------------------------------


@dataclass
class Prepared:
    cascades: list[RawCascade]
    labels: np.ndarray
    rumor_ids: list[str]
    retained_fraction: float
    tagged: list | None = None
    attrs: np.ndarray | None = None


def prepare(ds: LabeledDataset, cfg: ExperimentConfig) -> Prepared:
    """Size filter (on the untruncated cascade), then truncation, tagging and attributes."""
    kept = [c for c in ds if c.n >= cfg.min_cascade_size]
    if not kept:
        raise EmptyDatasetError(f"no cascades with at least {cfg.min_cascade_size} nodes")
    labels = np.array([c.label for c in kept])
    if np.unique(labels).size < 2:
        raise EmptyDatasetError(f"only one class among cascades with at least {cfg.min_cascade_size} nodes")
    before = sum(c.n for c in kept)
    if cfg.truncate_hours is not None:
        kept = [truncate_by_time(c, cfg.truncate_hours) for c in kept]
    if cfg.truncate_depth is not None:
        kept = [truncate_by_depth(c, cfg.truncate_depth) for c in kept]
    after = sum(c.n for c in kept)
    prep = Prepared(kept, labels, [c.rumor_id for c in kept], after / before)
    if cfg.model.startswith("wl-"):
        scheme = TagScheme(cfg.tags)
        prep.tagged = [apply_tags(c, scheme) for c in kept]
    elif cfg.model.startswith("features-"):
        prep.attrs = attribute_matrix(kept)
    elif cfg.model.startswith("attribute:"):
        prep.attrs = attribute_matrix(kept, [cfg.model.split(":", 1)[1]])
    return prep


def _standardize(Xtr: np.ndarray, Xte: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu = Xtr.mean(axis=0)
    sd = Xtr.std(axis=0)
    sd[sd == 0] = 1.0
    return (Xtr - mu) / sd, (Xte - mu) / sd


def _maxabs(Xtr: sp.csr_matrix, Xte: sp.csr_matrix) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    scale = np.asarray(abs(Xtr).max(axis=0).todense()).ravel()
    scale[scale == 0] = 1.0
    D = sp.diags(1.0 / scale)
    return (Xtr @ D).tocsr(), (Xte @ D).tocsr()


def trial_features(prep: Prepared, cfg: ExperimentConfig, tr: np.ndarray, te: np.ndarray):
    """Train/test design matrices. WL vocabulary and scaling come from the training rows only."""
    if cfg.model.startswith("wl-"):
        wl = WLConfig(cfg.wl_h, cfg.neighborhood)
        Xtr, index = embed_dataset([prep.tagged[i] for i in tr], wl)
        Xte = index.transform([prep.tagged[i] for i in te])
        if cfg.model == "wl-lin":
            Xtr, Xte = _maxabs(Xtr, Xte)
        return Xtr, Xte
    if cfg.model.startswith("features-"):
        Xtr, Xte = prep.attrs[tr], prep.attrs[te]
        if cfg.model == "features-lin":
            Xtr, Xte = _standardize(Xtr, Xte)
        return Xtr, Xte
    if cfg.model.startswith("attribute:"):
        return prep.attrs[tr], prep.attrs[te]
    return None, None


def train_model(X, y, rumor_ids: Sequence[str], model: str, grid: Sequence[dict] | None = None,
                seed: int = 0, folds: int = 5):
    """Cross-validate over ``grid``, refit on every row and return ``(model, CVResult)``.

    Linear families are fit on scaled features as in :func:`run_trial`; the
    scaling is folded into the returned weights so the model applies to raw
    features.
    """
    grid = default_grid(model) if grid is None else grid
    y = np.asarray(y)
    if model.endswith("-lin"):
        if sp.issparse(X):
            mu = np.zeros(X.shape[1])
            sd = np.asarray(abs(X).max(axis=0).todense()).ravel()
        else:
            X = np.asarray(X, dtype=np.float64)
            mu, sd = X.mean(axis=0), X.std(axis=0)
        sd[sd == 0] = 1.0
        Xs = (X @ sp.diags(1.0 / sd)).tocsr() if sp.issparse(X) else (X - mu) / sd
    else:
        Xs = X
    plan = SplitPlan(seed, 0.0, folds)
    cv = cross_validate(Xs, y, rumor_ids, model, grid, plan)
    fitted = fit_model(model, Xs, y, cv.params, seed)
    fitted.decision_threshold = cv.decision_threshold
    if model.endswith("-lin"):
        fitted.weights = fitted.weights / sd
        fitted.bias = float(fitted.bias - np.dot(fitted.weights, mu))
    return fitted, cv


# --- trials --------------------------------------------------------------


@dataclass
class TrialResult:
    trial: int
    seed: int
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int
    n_train: int
    n_test: int
    params: dict = field(default_factory=dict)
    decision_threshold: float | None = None
    cv_f1: float | None = None


def run_trial(prep: Prepared, cfg: ExperimentConfig, trial: int) -> TrialResult:
    seed = derive_seed(cfg.seed, trial)
    plan = SplitPlan(seed, cfg.test_fraction, cfg.folds)
    tr, te = split_indices(prep.rumor_ids, plan)
    ytr, yte = prep.labels[tr], prep.labels[te]
    params: dict = {}
    cut = cv_f1 = None
    if cfg.model == "noinfo":
        model = noinfo_train(ytr, seed=seed)
        pred, _ = predict(model, len(te), seed=seed)
        params = {"q": model.q}
    elif np.unique(ytr).size < 2:
        # degenerate split: fall back to the majority class
        pred = np.full(te.size, int(ytr[0]))
    else:
        Xtr, Xte = trial_features(prep, cfg, tr, te)
        if cfg.model.startswith("attribute:"):
            model = threshold_train(Xtr[:, 0], ytr, cfg.model.split(":", 1)[1])
            pred, _ = predict(model, Xte[:, 0])
            cut = model.threshold
        else:
            grid = cfg.resolved_grid()
            cv = cross_validate(Xtr, ytr, [prep.rumor_ids[i] for i in tr], cfg.model, grid, plan)
            model = fit_model(cfg.model, Xtr, ytr, cv.params, seed)
            model.decision_threshold = cv.decision_threshold
            pred, _ = predict(model, Xte)
            params, cut, cv_f1 = cv.params, cv.decision_threshold, cv.mean_f1
    cm = confusion(pred, yte)
    return TrialResult(
        trial, seed, cm.f1, cm.tp, cm.fp, cm.fn, cm.tn, int(tr.size), int(te.size), params,
        None if cut is None else _finite_or_str(cut), cv_f1,
    )


def _finite_or_str(x: float):
    return float(x) if math.isfinite(x) else ("inf" if x > 0 else "-inf")


@dataclass
class MetricsReport:
    config: dict
    n_samples: int
    n_positive: int
    retained_fraction: float
    trials: list[TrialResult]
    version: str = __version__

    @property
    def f1_scores(self) -> list[float]:
        return [t.f1 for t in self.trials]

    @property
    def mean_f1(self) -> float:
        return float(np.mean(self.f1_scores))

    @property
    def std_f1(self) -> float:
        return float(np.std(self.f1_scores))

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "config_hash": config_hash(self.config),
            "n_samples": self.n_samples,
            "n_positive": self.n_positive,
            "retained_fraction": self.retained_fraction,
            "mean_f1": self.mean_f1,
            "std_f1": self.std_f1,
            "trials": [asdict(t) for t in self.trials],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_table(self) -> str:
        c = self.config
        rows = [("model", c["model"]), ("tags", c["tags"]), ("wl_h", c["wl_h"]),
                ("samples", self.n_samples), ("positives", self.n_positive),
                ("trials", len(self.trials)), ("retained", f"{self.retained_fraction:.4f}"),
                ("mean F1", f"{self.mean_f1:.4f}"), ("std F1", f"{self.std_f1:.4f}")]
        w = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{w}}  {v}" for k, v in rows) + "\n"

    def write_trials_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh)
            wr.writerow(["trial", "seed", "f1", "tp", "fp", "fn", "tn", "n_train", "n_test"])
            for t in self.trials:
                wr.writerow([t.trial, t.seed, repr(t.f1), t.tp, t.fp, t.fn, t.tn, t.n_train, t.n_test])


def run_experiment(ds: LabeledDataset, cfg: ExperimentConfig) -> MetricsReport:
    prep = prepare(ds, cfg)
    trials = range(cfg.n_trials)
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            results = list(pool.map(lambda t: run_trial(prep, cfg, t), trials))
    else:
        results = [run_trial(prep, cfg, t) for t in trials]
    return MetricsReport(cfg.to_dict(), len(prep.cascades), int(prep.labels.sum()),
                         prep.retained_fraction, results)


def recompute_f1(trial: TrialResult) -> float:
    return Confusion(trial.tp, trial.fp, trial.fn, trial.tn).f1


# --- sweeps --------------------------------------------------------------


@dataclass
class SweepReport:
    kind: str
    values: list
    reports: list[MetricsReport]

    def to_dict(self) -> dict:
        return {
            "version": __version__,
            "sweep": self.kind,
            "points": [
                {"value": _finite_or_str(v), "n_samples": r.n_samples, "retained_fraction": r.retained_fraction,
                 "mean_f1": r.mean_f1, "std_f1": r.std_f1, "report": r.to_dict()}
                for v, r in zip(self.values, self.reports)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_table(self) -> str:
        head = (self.kind, "samples", "retained", "mean_f1", "std_f1")
        lines = [head] + [
            (str(v), str(r.n_samples), f"{r.retained_fraction:.4f}", f"{r.mean_f1:.4f}", f"{r.std_f1:.4f}")
            for v, r in zip(self.values, self.reports)
        ]
        widths = [max(len(row[i]) for row in lines) for i in range(len(head))]
        return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in lines) + "\n"

    @property
    def mean_f1(self) -> list[float]:
        return [r.mean_f1 for r in self.reports]


def sweep_min_size(ds: LabeledDataset, cfg: ExperimentConfig, thresholds: Sequence[int] = range(200, 801, 100)) -> SweepReport:
    values = list(thresholds)
    return SweepReport("min_size", values, [run_experiment(ds, replace(cfg, min_cascade_size=t)) for t in values])


def sweep_wl_iterations(ds: LabeledDataset, cfg: ExperimentConfig, hs: Sequence[int] = range(5)) -> SweepReport:
    values = list(hs)
    return SweepReport("wl_h", values, [run_experiment(ds, replace(cfg, wl_h=h)) for h in values])


def sweep_truncation(
    ds: LabeledDataset,
    cfg: ExperimentConfig,
    times: Sequence[float] | None = None,
    depths: Sequence[int] | None = None,
) -> SweepReport:
    """Evaluate at each truncation point; pass exactly one of ``times`` (hours) or ``depths``."""
    if (times is None) == (depths is None):
        raise ValueError("pass exactly one of times or depths")
    if times is not None:
        values = list(times)
        reports = [run_experiment(ds, replace(cfg, truncate_hours=t, truncate_depth=None)) for t in values]
        return SweepReport("hours", values, reports)
    values = list(depths)
    reports = [run_experiment(ds, replace(cfg, truncate_depth=d, truncate_hours=None)) for d in values]
    return SweepReport("depth", values, reports)


__all__ = [
    "CVResult", "EmptyDatasetError", "ExperimentConfig", "MetricsReport", "SplitPlan", "SweepReport",
    "TrialResult", "cross_validate", "default_grid", "derive_seed", "f1", "fit_model", "prepare",
    "recompute_f1", "rumor_folds", "run_experiment", "run_trial", "split_indices", "stratified_split",
    "sweep_min_size", "sweep_truncation", "sweep_wl_iterations", "train_model",
]
