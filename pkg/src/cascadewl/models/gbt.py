"""Histogram gradient-boosted trees with logistic loss, grown leaf-wise.

Inputs may be sparse; implicit zeros are never materialized. Each feature is
cut into at most ``n_bins`` value bins, histograms of gradient/hessian sums
are accumulated from the stored non-zeros only, and the zero bin is filled in
by subtracting from the leaf totals.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._common import as_matrix, check_training_data, sample_weights
from .linear import sigmoid


@dataclass
class Tree:
    feature: np.ndarray     # -1 at leaves
    threshold: np.ndarray   # go left iff x <= threshold
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray       # leaf outputs, already scaled by the learning rate

    def apply(self, X, columns: dict | None = None) -> np.ndarray:
        """Leaf index for each row. ``columns`` may hold pre-extracted dense columns."""
        X = as_matrix(X)
        n = X.shape[0]
        out = np.zeros(n, dtype=np.int64)
        if self.feature[0] < 0:
            return out
        cols = {} if columns is None else columns
        stack = [(0, np.arange(n))]
        while stack:
            node, rows = stack.pop()
            f = int(self.feature[node])
            if f < 0:
                out[rows] = node
                continue
            if f not in cols:
                cols[f] = _column(X, f)
            go_left = cols[f][rows] <= self.threshold[node]
            stack.append((int(self.left[node]), rows[go_left]))
            stack.append((int(self.right[node]), rows[~go_left]))
        return out

    def predict(self, X, columns: dict | None = None) -> np.ndarray:
        return self.value[self.apply(X, columns)]

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))


def _column(X, f: int) -> np.ndarray:
    if f >= X.shape[1]:
        return np.zeros(X.shape[0])
    if sp.issparse(X):
        return X[:, [f]].toarray().ravel()
    return np.asarray(X[:, f], dtype=np.float64)


@dataclass
class GBTModel:
    trees: list[Tree]
    base_score: float
    learning_rate: float
    n_trees: int
    max_leaves: int
    min_samples_leaf: int
    l2: float = 1.0
    n_bins: int = 64
    decision_threshold: float = 0.5
    train_loss: list[float] = field(default_factory=list, repr=False)

    def decision_function(self, X) -> np.ndarray:
        X = as_matrix(X)
        out = np.full(X.shape[0], self.base_score)
        used = sorted({int(f) for t in self.trees for f in t.feature if 0 <= f < X.shape[1]})
        dense = X[:, used].toarray() if sp.issparse(X) else np.asarray(X[:, used], dtype=np.float64)
        cols = {f: dense[:, k] for k, f in enumerate(used)}
        for t in self.trees:
            out += t.predict(X, cols)
        return out

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))


class _BinnedData:
    """Column-wise binned view of a training matrix, restricted to splittable columns.

    Bins of all kept columns live in one flat array: column ``j`` owns
    positions ``offset[j] .. offset[j] + n_bins[j] - 1``. Columns with at most
    ``max_bins`` distinct values get one bin per value; wider columns are cut
    at quantiles.
    """

    def __init__(self, X, max_bins: int, min_samples_leaf: int):
        X = sp.csc_matrix(X, dtype=np.float64)
        X.sum_duplicates()
        X.eliminate_zeros()
        n, F = X.shape
        self.n = n
        nnz_col = np.diff(X.indptr)
        ent_col = np.repeat(np.arange(F), nnz_col)
        n_zero = n - nnz_col
        zc = np.flatnonzero(n_zero > 0)  # one virtual zero entry per column with implicit zeros
        all_col = np.concatenate([ent_col, zc])
        all_val = np.concatenate([X.data, np.zeros(zc.size)])
        order = np.lexsort((all_val, all_col))
        sc, sv = all_col[order], all_val[order]
        new = np.ones(sc.size, dtype=bool)
        new[1:] = (sc[1:] != sc[:-1]) | (sv[1:] != sv[:-1])
        uid_sorted = np.cumsum(new) - 1
        ucol, uval = sc[new], sv[new]
        k = np.bincount(ucol, minlength=F)
        ustart = np.concatenate([[0], np.cumsum(k)])[:-1]
        ugroup = np.arange(ucol.size) - ustart[ucol]
        for f in np.flatnonzero(k > max_bins):
            lo = ustart[f]
            vals = X.data[X.indptr[f]:X.indptr[f + 1]]
            edges = _bin_edges(vals, int(n_zero[f]), max_bins)
            ugroup[lo:lo + k[f]] = np.searchsorted(edges, uval[lo:lo + k[f]], side="left")
        uid = np.empty(sc.size, dtype=np.int64)
        uid[order] = uid_sorted
        nb = np.zeros(F, dtype=np.int64)
        np.maximum.at(nb, ucol, ugroup + 1)
        off = np.concatenate([[0], np.cumsum(nb)])[:-1]
        T = int(nb.sum())
        gflat = off[ucol] + ugroup
        gmax = np.full(T, -np.inf)
        gmin = np.full(T, np.inf)
        np.maximum.at(gmax, gflat, uval)
        np.minimum.at(gmin, gflat, uval)
        ent_flat = gflat[uid[:ent_col.size]]
        zero_flat = np.full(F, -1, dtype=np.int64)
        zero_flat[zc] = gflat[uid[ent_col.size:]]
        counts = np.bincount(ent_flat, minlength=T).astype(np.int64)
        counts[zero_flat[zc]] += n_zero[zc]
        mode = np.maximum.reduceat(counts, off) if T else np.zeros(F, dtype=np.int64)
        keep = (nb >= 2) & (n - mode >= min_samples_leaf)

        kept = np.flatnonzero(keep)
        self.features = kept
        self.n_features = kept.size
        self.n_bins = nb[kept]
        self.offset = np.concatenate([[0], np.cumsum(self.n_bins)])[:-1].astype(np.int64)
        self.total_bins = int(self.n_bins.sum())
        pos_old = np.repeat(off[kept] - self.offset, self.n_bins) + np.arange(self.total_bins)
        # split between bin b and b+1 of a column: midway between the groups' extreme values
        nxt = np.minimum(pos_old + 1, max(T - 1, 0))
        self.edge = (gmax[pos_old] + gmin[nxt]) / 2.0 if T else np.zeros(0)
        self.pos_col = np.repeat(np.arange(kept.size), self.n_bins)
        last = self.offset + self.n_bins - 1
        self.splittable = np.ones(self.total_bins, dtype=bool)
        self.splittable[last] = False

        col_new = np.full(F, -1, dtype=np.int64)
        col_new[kept] = np.arange(kept.size)
        sel = keep[ent_col]
        ec = col_new[ent_col[sel]]
        self.ent_row = X.indices[sel].astype(np.int64)
        self.ent_flat = self.offset[ec] + (ent_flat[sel] - off[ent_col[sel]])
        self.col_ptr = np.concatenate([[0], np.cumsum(np.bincount(ec, minlength=kept.size))]).astype(np.int64)
        zb = zero_flat[kept]
        self.zero_flat = np.where(zb >= 0, self.offset + (zb - off[kept]), -1)
        # the same entries ordered by row, for histograms over a subset of rows
        by_row = np.argsort(self.ent_row, kind="stable")
        self.row_flat = self.ent_flat[by_row]
        self.row_ptr = np.concatenate([[0], np.cumsum(np.bincount(self.ent_row, minlength=n))]).astype(np.int64)

    def column_bins(self, j: int) -> np.ndarray:
        """Within-column bin index of every row for kept column ``j``."""
        zero = self.zero_flat[j] - self.offset[j] if self.zero_flat[j] >= 0 else 0
        out = np.full(self.n, zero, dtype=np.int64)
        lo, hi = self.col_ptr[j], self.col_ptr[j + 1]
        out[self.ent_row[lo:hi]] = self.ent_flat[lo:hi] - self.offset[j]
        return out

    def histogram(self, rows: np.ndarray, g: np.ndarray, h: np.ndarray) -> np.ndarray:
        """Array of shape (3, total_bins): gradient sums, hessian sums, row counts over ``rows``."""
        T = self.total_bins
        starts = self.row_ptr[rows]
        lens = self.row_ptr[rows + 1] - starts
        total = int(lens.sum())
        if total == self.row_flat.size:
            idx = self.row_flat
        else:
            shift = np.repeat(starts - (np.cumsum(lens) - lens), lens)
            idx = self.row_flat[np.arange(total) + shift]
        gr, hr = g[rows], h[rows]
        hist = np.empty((3, T))
        hist[0] = np.bincount(idx, weights=np.repeat(gr, lens), minlength=T)
        hist[1] = np.bincount(idx, weights=np.repeat(hr, lens), minlength=T)
        hist[2] = np.bincount(idx, minlength=T)
        has_zero = self.zero_flat >= 0
        if has_zero.any():
            totals = np.array([gr.sum(), hr.sum(), rows.size])
            colsum = np.add.reduceat(hist, self.offset, axis=1)
            zf = self.zero_flat[has_zero]
            hist[:, zf] += totals[:, None] - colsum[:, has_zero]
        return hist


def _bin_edges(nonzero_vals: np.ndarray, n_zero: int, n_bins: int) -> np.ndarray:
    """Quantile cut points for a column with more than ``n_bins`` distinct values."""
    full = np.concatenate([nonzero_vals, np.zeros(n_zero)])
    picks = np.unique(np.quantile(full, np.linspace(0, 1, n_bins + 1)[1:-1], method="lower"))
    uniq = np.unique(np.concatenate([picks, [full.max()]]))
    return (uniq[:-1] + uniq[1:]) / 2.0


def _best_split(data: _BinnedData, hist: np.ndarray, l2: float, min_samples_leaf: int):
    """Best (gain, column, bin) for one leaf; a split sends bins <= bin left."""
    if data.n_features == 0:
        return -np.inf, -1, -1
    G, H, C = hist
    j0 = data.offset[0]
    gt, ht, ct = G[j0:j0 + data.n_bins[0]].sum(), H[j0:j0 + data.n_bins[0]].sum(), C[j0:j0 + data.n_bins[0]].sum()
    if ct < 2 * min_samples_leaf:
        return -np.inf, -1, -1
    # splitting after an empty bin repeats the split after the previous one
    cand = np.flatnonzero(data.splittable & (C > 0))
    cs = np.cumsum(hist, axis=1)
    base = np.concatenate([np.zeros((3, 1)), cs[:, :-1]], axis=1)[:, data.offset]
    GL, HL, CL = cs[:, cand] - base[:, data.pos_col[cand]]
    GR, HR, CR = gt - GL, ht - HL, ct - CL
    gain = GL**2 / (HL + l2) + GR**2 / (HR + l2) - gt**2 / (ht + l2)
    gain = np.where((CL >= min_samples_leaf) & (CR >= min_samples_leaf), gain, -np.inf)
    if gain.size == 0:
        return -np.inf, -1, -1
    k = int(np.argmax(gain))  # first maximum: lowest column, then lowest bin
    if not np.isfinite(gain[k]):
        return -np.inf, -1, -1
    p = int(cand[k])
    j = int(data.pos_col[p])
    return 0.5 * float(gain[k]), j, p - int(data.offset[j])


def logistic_loss(raw: np.ndarray, y: np.ndarray, sw: np.ndarray) -> float:
    return float(np.dot(sw, np.logaddexp(0.0, raw) - y * raw) / sw.sum())


def gbt_train(
    X,
    y,
    n_trees: int = 50,
    learning_rate: float = 0.1,
    max_leaves: int = 8,
    min_samples_leaf: int = 5,
    l2: float = 1.0,
    n_bins: int = 64,
    class_weights=None,
    min_gain: float = 1e-12,
    seed: int = 0,
) -> GBTModel:
    """Fit ``n_trees`` Newton-step regression trees to the logistic loss.

    Training is deterministic; ``seed`` is accepted for interface symmetry.
    """
    X, y = check_training_data(X, y)
    if max_leaves < 2:
        raise ValueError("max_leaves must be >= 2")
    sw = sample_weights(y, class_weights)
    p0 = float(np.dot(sw, y) / sw.sum())
    base = float(np.log(p0 / (1.0 - p0)))
    raw = np.full(y.size, base)
    data = _BinnedData(X, n_bins, min_samples_leaf)
    trees: list[Tree] = []
    losses = [logistic_loss(raw, y, sw)]
    for _ in range(n_trees):
        p = sigmoid(raw)
        g = sw * (p - y)
        h = sw * p * (1.0 - p)
        tree, leaf_of_row = _grow_tree(data, g, h, l2, max_leaves, min_samples_leaf, min_gain, learning_rate)
        raw += tree.value[leaf_of_row]
        trees.append(tree)
        losses.append(logistic_loss(raw, y, sw))
    return GBTModel(trees, base, learning_rate, n_trees, max_leaves, min_samples_leaf, l2, n_bins, train_loss=losses)


def _grow_tree(data: _BinnedData, g, h, l2, max_leaves, min_samples_leaf, min_gain, lr):
    n = data.n
    feature, threshold, left, right, value = [-1], [0.0], [-1], [-1], [0.0]
    masks = {0: np.ones(n, dtype=bool)}
    hists = {0: data.histogram(np.arange(n), g, h)}
    splits = {0: _best_split(data, hists[0], l2, min_samples_leaf)}
    n_leaves = 1
    while n_leaves < max_leaves:
        node = max(splits, key=lambda k: (splits[k][0], -k))
        gain, j, b = splits[node]
        if not gain > min_gain:
            break
        go_left = data.column_bins(j) <= b
        lmask = masks[node] & go_left
        rmask = masks[node] & ~go_left
        li, ri = len(feature), len(feature) + 1
        for _ in range(2):
            feature.append(-1); threshold.append(0.0); left.append(-1); right.append(-1); value.append(0.0)
        feature[node] = int(data.features[j])
        threshold[node] = float(data.edge[data.offset[j] + b])
        left[node], right[node] = li, ri
        # build the smaller child, derive the sibling by subtraction
        if lmask.sum() <= rmask.sum():
            hl = data.histogram(np.flatnonzero(lmask), g, h)
            hr = hists[node] - hl
        else:
            hr = data.histogram(np.flatnonzero(rmask), g, h)
            hl = hists[node] - hr
        del masks[node], hists[node], splits[node]
        for idx, m, hh in ((li, lmask, hl), (ri, rmask, hr)):
            masks[idx] = m
            hists[idx] = hh
            splits[idx] = _best_split(data, hh, l2, min_samples_leaf)
        n_leaves += 1
    leaf_of_row = np.zeros(n, dtype=np.int64)
    for idx, m in masks.items():
        leaf_of_row[m] = idx
        gs, hs = g[m].sum(), h[m].sum()
        value[idx] = -lr * gs / (hs + l2)
    tree = Tree(
        np.asarray(feature, dtype=np.int64), np.asarray(threshold), np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64), np.asarray(value),
    )
    return tree, leaf_of_row
