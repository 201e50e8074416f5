"""Weisfeiler-Lehman subtree features for tagged cascades.

Each iteration relabels node ``v`` with the interned composite string
``"<old tag>|<sorted neighbor tags, comma-joined>"``. The embedding of a
cascade counts every (iteration, tag) pair for iterations ``0..h``.

Interned ids are handed out in first-seen order, so they depend on which
cascade was processed first. :class:`FeatureIndex` removes that dependence:
it rewrites every vocabulary entry into a canonical label (ids replaced by
their rank among the canonical labels of the previous iteration) and orders
columns by ``(iteration, canonical label)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .cascades import Cascade

NEIGHBORHOODS = ("undirected", "children")
UNKNOWN = -1


class InternerMismatchError(ValueError):
    """Feature vectors built with different interners cannot be compared."""


@dataclass(frozen=True)
class WLConfig:
    h: int = 2
    neighborhood: str = "undirected"

    def __post_init__(self):
        if self.h < 0:
            raise ValueError(f"h must be >= 0, got {self.h}")
        if self.neighborhood not in NEIGHBORHOODS:
            raise ValueError(f"neighborhood must be one of {NEIGHBORHOODS}")


class Interner:
    """Injective map from composite label strings to compact ids, one table per iteration.

    Iteration 0 is not interned: the initial node tags are used as-is. Once
    frozen, unseen strings map to ``UNKNOWN`` (-1) instead of a fresh id.
    """

    def __init__(self):
        self._ids: list[dict[str, int]] = []
        self._labels: list[list[str]] = []
        self.frozen = False

    def _table(self, iteration: int) -> tuple[dict[str, int], list[str]]:
        if iteration < 1:
            raise ValueError("iteration 0 tags are not interned")
        while len(self._ids) < iteration:
            self._ids.append({})
            self._labels.append([])
        return self._ids[iteration - 1], self._labels[iteration - 1]

    def intern(self, iteration: int, label: str) -> int:
        return self.intern_many(iteration, [label])[0]

    def intern_many(self, iteration: int, labels: Iterable[str]) -> list[int]:
        ids, rev = self._table(iteration)
        labels = list(labels)
        out = list(map(ids.get, labels))
        if None not in out:
            return out
        if self.frozen:
            return [UNKNOWN if j is None else j for j in out]
        # fresh labels get ids in first-seen order
        fresh = [s for s in dict.fromkeys(labels) if s not in ids]
        ids.update(zip(fresh, range(len(rev), len(rev) + len(fresh))))
        rev.extend(fresh)
        return list(map(ids.get, labels))

    def label(self, iteration: int, tag: int) -> str:
        if iteration == 0:
            return str(tag)
        return self._table(iteration)[1][tag]

    def size(self, iteration: int) -> int:
        if iteration == 0 or iteration > len(self._labels):
            return 0
        return len(self._labels[iteration - 1])

    @property
    def iterations(self) -> int:
        return len(self._labels)

    def freeze(self) -> "Interner":
        self.frozen = True
        return self

    def to_dict(self) -> dict:
        return {"frozen": self.frozen, "labels": [list(t) for t in self._labels]}

    @classmethod
    def from_dict(cls, obj: dict) -> "Interner":
        it = cls()
        for i, labels in enumerate(obj["labels"], 1):
            it.intern_many(i, labels)
        it.frozen = bool(obj.get("frozen", True))
        return it


@dataclass
class FeatureVector:
    """Sparse bag of (iteration, tag) counts for one cascade."""

    counts: dict[tuple[int, int], int]
    n: int
    interner: Interner | None = field(default=None, compare=False, repr=False)

    def iteration_mass(self, i: int) -> int:
        return sum(v for (it, _), v in self.counts.items() if it == i)

    def __getitem__(self, key: tuple[int, int]) -> int:
        return self.counts.get(key, 0)


# --- relabeling ----------------------------------------------------------
#
# Two routes produce identical tags. The exact route builds every composite
# string in Python after a bucket sort of neighbor tags. The array route sorts
# (receiver, neighbor tag) keys in numpy, groups nodes by a 64-bit signature
# (polynomial hash of the sorted neighbor tags mixed with tag and degree),
# checks every node against its group representative, and builds strings only
# for distinct signatures. A collision sends the round down the exact route.


def _neighbor_lists(cascades: Sequence[Cascade], neighborhood: str) -> list[list[int]]:
    """Adjacency over the batch, with nodes numbered consecutively across cascades."""
    adj: list[list[int]] = []
    offset = 0
    for c in cascades:
        for v in range(c.n):
            nb = [offset + u for u in c.children[v]]
            p = c.parents[v]
            if neighborhood == "undirected" and p >= 0:
                nb.append(offset + p)
            adj.append(nb)
        offset += c.n
    return adj


def _sorted_neighbor_tags(adj: list[list[int]], tags: list[int]) -> list[list[int]]:
    """Each node's multiset of neighbor tags in ascending order, by bucket sort.

    One bucket per tag value. Bucket lists are filled in receiver order and
    then drained in tag order, so every node's list comes out sorted in
    O(n + m + |alphabet|). With a large frozen vocabulary the alphabet may
    dwarf the batch; then only the occupied buckets are visited.
    """
    n = len(tags)
    out: list[list[int]] = [[] for _ in range(n)]
    if not n:
        return out
    n_edges = sum(len(a) for a in adj)
    hi = max(tags) + 2  # +1 shift so UNKNOWN lands in bucket 0
    if hi <= 2 * (n + n_edges) + 64:
        buckets: list[list[int]] = [[] for _ in range(hi)]
        for v, nb in enumerate(adj):
            for u in nb:
                buckets[tags[u] + 1].append(v)
        for t1, bucket in enumerate(buckets):
            for v in bucket:
                out[v].append(t1 - 1)
    else:
        sparse: dict[int, list[int]] = {}
        for v, nb in enumerate(adj):
            for u in nb:
                sparse.setdefault(tags[u], []).append(v)
        for t in sorted(sparse):
            for v in sparse[t]:
                out[v].append(t)
    return out


def composite_label(old_tag: int, neighbor_tags: Sequence[int]) -> str:
    return f"{old_tag}|{','.join(map(str, neighbor_tags))}"


def _relabel_exact(adj: list[list[int]], tags: Sequence[int], interner: Interner, iteration: int) -> list[int]:
    tags = list(tags)
    nbr = _sorted_neighbor_tags(adj, tags)
    return interner.intern_many(iteration, (composite_label(t, s) for t, s in zip(tags, nbr)))


_B1 = np.uint64(0x9E3779B97F4A7C15)
_B2 = np.uint64(0xC2B2AE3D27D4EB4F)


def _powers(base: np.uint64, k: int) -> np.ndarray:
    out = np.full(max(k, 1), base, dtype=np.uint64)
    out[0] = 1
    return np.cumprod(out, dtype=np.uint64)  # wraps mod 2^64


def _concat(seqs: Iterable[Sequence[int]]) -> np.ndarray:
    parts = [np.asarray(x, dtype=np.int64) for x in seqs]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


class _Batch:
    """Receiver-major neighbor incidences for a batch of cascades."""

    def __init__(self, cascades: Sequence[Cascade], neighborhood: str):
        self.cascades = cascades
        self.neighborhood = neighborhood
        sizes = np.asarray([c.n for c in cascades], dtype=np.int64)
        self.sizes = sizes
        self.n = int(sizes.sum())
        par = _concat(c.parents for c in cascades)
        child = np.flatnonzero(par >= 0)
        parent = par[child] + np.repeat(np.cumsum(sizes) - sizes, sizes)[child]
        if neighborhood == "undirected":
            rec, snd = np.concatenate([parent, child]), np.concatenate([child, parent])
        else:
            rec, snd = parent, child
        order = np.argsort(rec, kind="stable")
        self.rec, self.snd = rec[order], snd[order]
        self.deg = np.bincount(self.rec, minlength=self.n)
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.deg, out=self.indptr[1:])
        self.pos = np.arange(self.rec.size) - self.indptr[self.rec]
        k = int(self.deg.max()) if self.n else 0
        self.pw1 = _powers(_B1, k)
        self.starts = self.indptr[:-1][self.deg > 0]
        self._adj = None

    def adjacency(self) -> list[list[int]]:
        if self._adj is None:
            self._adj = _neighbor_lists(self.cascades, self.neighborhood)
        return self._adj

    def _hash(self, v: np.ndarray, pw: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.uint64)
        if v.size:
            out[self.deg > 0] = np.add.reduceat(v * pw[self.pos], self.starts)
        return out

    def relabel(self, tags: np.ndarray, interner: Interner, iteration: int) -> np.ndarray:
        if not self.n:
            return np.zeros(0, dtype=np.int64)
        width = int(tags.max()) + 2  # +1 shift keeps UNKNOWN non-negative
        key = self.rec * width + (tags[self.snd] + 1)
        key.sort()
        nts = key - self.rec * width - 1
        v = (nts + 2).astype(np.uint64)
        sig = self._hash(v, self.pw1) ^ (tags.astype(np.uint64) * _B2) ^ (self.deg.astype(np.uint64) << np.uint64(40))
        order = np.argsort(sig, kind="stable")
        ss = sig[order]
        first = np.ones(self.n, dtype=bool)
        first[1:] = ss[1:] != ss[:-1]
        group = np.empty(self.n, dtype=np.int64)
        group[order] = np.cumsum(first) - 1
        rep = order[first]  # stable sort: the lowest node index of each group
        # a group's members must match its representative exactly
        rep_of = rep[group]
        if not (
            np.array_equal(tags[rep_of], tags)
            and np.array_equal(self.deg[rep_of], self.deg)
            and np.array_equal(nts[self.indptr[rep_of[self.rec]] + self.pos], nts)
        ):
            return np.asarray(_relabel_exact(self.adjacency(), tags.tolist(), interner, iteration), dtype=np.int64)
        # intern in first-seen node order so ids match the exact route
        seen = np.argsort(rep)
        tl, nl, ip = tags.tolist(), nts.tolist(), self.indptr.tolist()
        labels = [f"{tl[r]}|{','.join(map(str, nl[ip[r]:ip[r + 1]]))}" for r in rep[seen].tolist()]
        ids = np.empty(rep.size, dtype=np.int64)
        ids[seen] = interner.intern_many(iteration, labels)
        return ids[group]


def wl_relabel_step(
    c: Cascade,
    current_tags: Sequence[int],
    interner: Interner,
    iteration: int = 1,
    neighborhood: str = "undirected",
) -> list[int]:
    """One refinement round on a single cascade."""
    if len(current_tags) != c.n:
        raise ValueError("current_tags must assign a tag to every node")
    return _Batch([c], neighborhood).relabel(np.asarray(current_tags, dtype=np.int64), interner, iteration).tolist()


def _initial_tags(cascades: Sequence[Cascade]) -> np.ndarray:
    for c in cascades:
        if c.tags is None:
            raise ValueError("cascade has no tags; run apply_tags first")
    return _concat(c.tags for c in cascades)


def node_tags(cascades: Sequence[Cascade], cfg: WLConfig, interner: Interner) -> list[np.ndarray]:
    """Per-iteration node tags ``[tau_0, ..., tau_h]`` over the concatenated batch."""
    batch = _Batch(cascades, cfg.neighborhood)
    rounds = [_initial_tags(cascades)]
    for i in range(1, cfg.h + 1):
        rounds.append(batch.relabel(rounds[-1], interner, i))
    return rounds


def embed_many(cascades: Sequence[Cascade], cfg: WLConfig, interner: Interner) -> list[FeatureVector]:
    rounds = node_tags(cascades, cfg, interner)
    counts: list[dict[tuple[int, int], int]] = [{} for _ in cascades]
    owner = np.repeat(np.arange(len(cascades), dtype=np.int64), [c.n for c in cascades])
    for i, tags in enumerate(rounds):
        keep = tags != UNKNOWN
        if not keep.any():
            continue
        width = int(tags.max()) + 1
        keys, n = np.unique(owner[keep] * width + tags[keep], return_counts=True)
        for k, cnt in zip(keys.tolist(), n.tolist()):
            counts[k // width][(i, k % width)] = cnt
    return [FeatureVector(d, c.n, interner) for d, c in zip(counts, cascades)]


def embed(c: Cascade, cfg: WLConfig = WLConfig(), interner: Interner | None = None) -> FeatureVector:
    return embed_many([c], cfg, Interner() if interner is None else interner)[0]


def kernel(a, b, cfg: WLConfig = WLConfig(), interner: Interner | None = None) -> float:
    """Inner product of WL embeddings.

    ``a`` and ``b`` are either :class:`FeatureVector` (built with the same
    interner) or tagged :class:`Cascade` objects, which are embedded here
    under a shared interner.
    """
    if isinstance(a, Cascade) and isinstance(b, Cascade):
        interner = Interner() if interner is None else interner
        a, b = embed_many([a, b], cfg, interner)
    if a.interner is not b.interner:
        raise InternerMismatchError("feature vectors were embedded with different interners")
    if len(a.counts) > len(b.counts):
        a, b = b, a
    return float(sum(v * b.counts.get(k, 0) for k, v in a.counts.items()))


# --- dataset-level feature matrix ---------------------------------------


class FeatureIndex:
    """Column layout for a WL feature matrix, bound to a frozen interner."""

    def __init__(self, interner: Interner, cfg: WLConfig, keys: Sequence[tuple[int, int]], labels: Sequence[str]):
        self.interner = interner
        self.cfg = cfg
        self.keys = list(keys)
        self.labels = list(labels)
        self.column = {k: j for j, k in enumerate(self.keys)}

    def __len__(self) -> int:
        return len(self.keys)

    @classmethod
    def build(cls, interner: Interner, cfg: WLConfig, iteration0_tags: Iterable[int]) -> "FeatureIndex":
        entries: list[tuple[int, str, int]] = []
        rank: dict[int, int] = {}
        for t in sorted(set(iteration0_tags)):
            rank[t] = t
            entries.append((0, str(t), t))
        for i in range(1, cfg.h + 1):
            canon = []
            for j in range(interner.size(i)):
                old, _, rest = interner.label(i, j).partition("|")
                nbrs = sorted(rank[int(x)] for x in rest.split(",")) if rest else []
                canon.append((composite_label(rank[int(old)], nbrs), j))
            canon.sort()
            rank = {j: r for r, (_, j) in enumerate(canon)}
            entries.extend((i, s, j) for s, j in canon)
        entries.sort(key=lambda e: (e[0], e[1]))
        return cls(interner, cfg, [(i, j) for i, _, j in entries], [s for _, s, _ in entries])

    def transform(self, cascades: Sequence[Cascade]) -> sp.csr_matrix:
        fvs = embed_many(cascades, self.cfg, self.interner)
        return self.matrix(fvs)

    def matrix(self, fvs: Sequence[FeatureVector]) -> sp.csr_matrix:
        indptr = [0]
        indices: list[int] = []
        data: list[int] = []
        for fv in fvs:
            row = sorted((self.column[k], v) for k, v in fv.counts.items() if k in self.column)
            indices.extend(j for j, _ in row)
            data.extend(v for _, v in row)
            indptr.append(len(indices))
        return sp.csr_matrix(
            (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
            shape=(len(fvs), len(self.keys)),
        )

    def describe(self) -> list[tuple[int, str]]:
        return [(i, s) for (i, _), s in zip(self.keys, self.labels)]

    def to_dict(self) -> dict:
        return {
            "h": self.cfg.h,
            "neighborhood": self.cfg.neighborhood,
            "interner": self.interner.to_dict(),
            "keys": [list(k) for k in self.keys],
            "labels": self.labels,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "FeatureIndex":
        interner = Interner.from_dict(obj["interner"]).freeze()
        cfg = WLConfig(obj["h"], obj["neighborhood"])
        return cls(interner, cfg, [tuple(k) for k in obj["keys"]], obj["labels"])


def embed_dataset(
    cascades: Sequence[Cascade], cfg: WLConfig, index: FeatureIndex | None = None
) -> tuple[sp.csr_matrix, FeatureIndex]:
    """Embed tagged cascades as rows of a sparse count matrix.

    Without ``index`` a fresh interner is built from ``cascades`` and frozen,
    so the result can embed held-out cascades via ``index.transform``; motifs
    never seen here are dropped there.
    """
    if index is not None:
        return index.transform(cascades), index
    interner = Interner()
    fvs = embed_many(cascades, cfg, interner)
    interner.freeze()
    index = FeatureIndex.build(interner, cfg, (t for c in cascades for t in c.tags))
    return index.matrix(fvs), index


def gram_matrix(X: sp.spmatrix) -> np.ndarray:
    return np.asarray((X @ X.T).todense(), dtype=np.float64)


# --- sparse triplet export ----------------------------------------------


def write_triplets(X: sp.spmatrix, path: str | Path, header: dict | None = None) -> None:
    """Write ``row col count`` lines; a leading ``#`` line carries shape and metadata."""
    coo = sp.coo_matrix(X)
    order = np.lexsort((coo.col, coo.row))
    meta = {"rows": X.shape[0], "cols": X.shape[1], **(header or {})}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{r} {c} {_fmt(v)}\n")


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def read_triplets(path: str | Path) -> tuple[sp.csr_matrix, dict]:
    rows, cols, vals = [], [], []
    meta: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                meta = json.loads(line[1:])
                continue
            try:
                r, c, v = line.split()
                rows.append(int(r))
                cols.append(int(c))
                vals.append(float(v))
            except ValueError:
                raise ValueError(f"line {lineno}: expected 'row col count', got {line!r}") from None
    shape = (meta.get("rows", max(rows, default=-1) + 1), meta.get("cols", max(cols, default=-1) + 1))
    X = sp.csr_matrix((vals, (rows, cols)), shape=shape, dtype=np.float64)
    return X, meta


def write_index(index: FeatureIndex, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("col\titeration\tlabel\n")
        for j, (i, s) in enumerate(index.describe()):
            fh.write(f"{j}\t{i}\t{s}\n")
