"""Label-only and single-attribute baselines."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class ThresholdModel:
    """Predicts negative for values below ``threshold``, positive otherwise."""

    attribute: str
    threshold: float
    train_f1: float = 0.0
    column: int | None = None

    def predict(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=np.float64)
        if v.ndim == 2:
            v = v[:, 0 if self.column is None else self.column]
        return (v >= self.threshold).astype(np.int64)


def _f1_counts(tp, fp, fn):
    denom = 2 * tp + fp + fn
    return np.where(denom > 0, 2 * tp / np.maximum(denom, 1), 0.0)


def candidate_thresholds(values) -> np.ndarray:
    """``-inf``, the midpoints between sorted distinct values, and ``+inf``."""
    u = np.unique(np.asarray(values, dtype=np.float64))
    return np.concatenate([[-math.inf], (u[:-1] + u[1:]) / 2.0, [math.inf]])


def threshold_train(values, y, attribute: str = "", column: int | None = None) -> ThresholdModel:
    """Pick the candidate threshold with the best training F1.

    Ties go to the smaller threshold, except that when no threshold reaches a
    positive F1 the model predicts everything negative (``+inf``).
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    t = np.asarray(y, dtype=np.int64).ravel()
    if v.size != t.size:
        raise ValueError("values and labels differ in length")
    if not np.isfinite(v).all():
        raise ValueError("threshold baseline needs finite values")
    u, inv = np.unique(v, return_inverse=True)
    pos = np.bincount(inv, weights=t, minlength=u.size)
    cnt = np.bincount(inv, minlength=u.size).astype(np.float64)
    # candidate k predicts positive for distinct values u[k:], k = 0..len(u)
    tp = np.concatenate([np.cumsum(pos[::-1])[::-1], [0.0]])
    pp = np.concatenate([np.cumsum(cnt[::-1])[::-1], [0.0]])
    total_pos = pos.sum()
    scores = _f1_counts(tp, pp - tp, total_pos - tp)
    cands = np.concatenate([[-math.inf], (u[:-1] + u[1:]) / 2.0, [math.inf]])
    best = float(scores.max()) if scores.size else 0.0
    if best <= 0.0:
        return ThresholdModel(attribute, math.inf, 0.0, column)
    k = int(np.argmax(scores))
    return ThresholdModel(attribute, float(cands[k]), best, column)


@dataclass
class NoInfoModel:
    """Predicts positive with probability ``q`` regardless of input."""

    q: float
    expected_f1: float = 0.0

    def predict(self, n: int, seed: int = 0) -> np.ndarray:
        return (np.random.default_rng(seed).random(n) < self.q).astype(np.int64)


def noinfo_expected_f1(q: float, prevalence: float) -> float:
    """Large-sample F1 of a Bernoulli(q) guesser: precision -> prevalence, recall -> q."""
    if q + prevalence == 0:
        return 0.0
    return 2.0 * q * prevalence / (q + prevalence)


def noinfo_simulated_f1(q: float, n_pos: int, n_neg: int, draws: int = 10_000, seed: int = 0) -> float:
    """Mean F1 of Bernoulli(q) guesses over ``draws`` simulated labelings of a fixed label set."""
    rng = np.random.default_rng(seed)
    tp = rng.binomial(n_pos, q, size=draws)
    fp = rng.binomial(n_neg, q, size=draws)
    return float(_f1_counts(tp, fp, n_pos - tp).mean())


def noinfo_train(y, draws: int = 10_000, seed: int = 0, grid_size: int = 101) -> NoInfoModel:
    """Grid-search the positive rate ``q`` in {0, 0.01, ..., 1} for best simulated F1 on ``y``."""
    t = np.asarray(y, dtype=np.int64).ravel()
    if t.size < 1:
        raise ValueError("need at least one label")
    n_pos = int(t.sum())
    n_neg = int(t.size - n_pos)
    best_q, best = 0.0, -1.0
    for k in range(grid_size):
        q = k / (grid_size - 1)
        score = noinfo_simulated_f1(q, n_pos, n_neg, draws, seed + k)
        if score > best:
            best_q, best = q, score
    return NoInfoModel(best_q, best)
