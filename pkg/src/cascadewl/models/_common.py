from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class TrainingDataError(ValueError):
    pass


def as_matrix(X):
    if sp.issparse(X):
        return X.tocsr()
    X = np.asarray(X, dtype=np.float64)
    return X.reshape(-1, 1) if X.ndim == 1 else X


def check_training_data(X, y):
    X = as_matrix(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] != y.size:
        raise TrainingDataError(f"X has {X.shape[0]} rows but y has {y.size} labels")
    if not np.isin(y, (0.0, 1.0)).all():
        raise TrainingDataError("labels must be 0/1")
    if y.size < 2 or y.min() == y.max():
        raise TrainingDataError("training data must contain both classes")
    data = X.data if sp.issparse(X) else X
    if not np.isfinite(data).all():
        raise TrainingDataError("features contain non-finite values")
    return X, y


def sample_weights(y: np.ndarray, class_weights) -> np.ndarray:
    """Per-sample weights from ``None`` (uniform), ``"balanced"`` or a ``{0: w0, 1: w1}`` dict."""
    if class_weights is None:
        return np.ones_like(y, dtype=np.float64)
    if class_weights == "balanced":
        n_pos = y.sum()
        n = y.size
        n_neg = n - n_pos
        w1 = n / (2.0 * n_pos) if n_pos else 0.0
        w0 = n / (2.0 * n_neg) if n_neg else 0.0
    else:
        w0, w1 = float(class_weights[0]), float(class_weights[1])
    return np.where(y == 1, w1, w0).astype(np.float64)
