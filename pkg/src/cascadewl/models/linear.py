"""L2-regularized logistic regression trained by full-batch gradient descent."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ._common import as_matrix, check_training_data, sample_weights

log = logging.getLogger(__name__)


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    l2_lambda: float
    decision_threshold: float = 0.5
    n_iter: int = 0
    converged: bool = False

    def decision_function(self, X) -> np.ndarray:
        X = as_matrix(X)
        d = self.weights.size
        if X.shape[1] > d:
            X = X[:, :d]
        w = self.weights if X.shape[1] == d else self.weights[: X.shape[1]]
        return np.asarray(X @ w).ravel() + self.bias

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def logistic_loss_grad(w: np.ndarray, b: float, X, y, sw: np.ndarray, l2: float) -> tuple[float, np.ndarray, float]:
    """Weighted mean logistic loss plus ``l2 * ||w||^2``, with its gradient.

    Weights are normalized by their sum, so duplicating a sample ``k`` times
    is the same as giving it weight ``k``.
    """
    z = np.asarray(X @ w).ravel() + b
    total = sw.sum()
    loss = float(np.dot(sw, np.logaddexp(0.0, z) - y * z) / total + l2 * np.dot(w, w))
    r = sw * (sigmoid(z) - y) / total
    gw = np.asarray(X.T @ r).ravel() + 2.0 * l2 * w
    return loss, gw, float(r.sum())


def logreg_train(
    X,
    y,
    l2_lambda: float = 1e-2,
    class_weights="balanced",
    tol: float = 1e-6,
    max_epochs: int = 5000,
    seed: int | None = None,
    init_scale: float = 0.0,
) -> LinearModel:
    """Minimize the class-weighted logistic loss with backtracking gradient descent.

    Steps start from the Barzilai-Borwein estimate and are halved until the
    Armijo condition holds. ``init_scale > 0`` starts from Gaussian weights
    drawn with ``seed``.
    """
    X, y = check_training_data(X, y)
    sw = sample_weights(y, class_weights)
    d = X.shape[1]
    rng = np.random.default_rng(seed)
    theta = init_scale * rng.standard_normal(d + 1) if init_scale else np.zeros(d + 1)

    def fg(th):
        loss, gw, gb = logistic_loss_grad(th[:-1], th[-1], X, y, sw, l2_lambda)
        return loss, np.append(gw, gb)

    f, g = fg(theta)
    step = 1.0
    prev = None
    converged = False
    it = 0
    for it in range(1, max_epochs + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm < tol:
            converged = True
            break
        if prev is not None:
            s, yk = theta - prev[0], g - prev[1]
            sy = float(np.dot(s, yk))
            if sy > 0:
                step = float(np.dot(s, s)) / sy
        gg = gnorm * gnorm
        while True:
            cand = theta - step * g
            fc, gc = fg(cand)
            if fc <= f - 1e-4 * step * gg or step < 1e-20:
                break
            step *= 0.5
        prev = (theta, g)
        theta, f, g = cand, fc, gc
    else:
        converged = float(np.linalg.norm(g)) < tol
    if not converged:
        log.debug("logreg stopped after %d epochs, |grad| = %.3g", it, np.linalg.norm(g))
    return LinearModel(theta[:-1].copy(), float(theta[-1]), l2_lambda, n_iter=it, converged=converged)


def training_loss(model: LinearModel, X, y, class_weights="balanced") -> float:
    X, y = check_training_data(X, y)
    return logistic_loss_grad(model.weights, model.bias, X, y, sample_weights(y, class_weights), model.l2_lambda)[0]


__all__ = ["LinearModel", "logistic_loss_grad", "logreg_train", "sigmoid", "training_loss"]
