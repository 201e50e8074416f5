"""Handcrafted per-cascade attributes for the attribute and feature-vector baselines."""
from __future__ import annotations

import csv
import math
from pathlib import Path
from statistics import median
from typing import Iterable, Sequence

import numpy as np

from .cascades import Cascade, LabeledDataset, RawCascade, sanitize
from .tagging import MissingAttributeError

DAY = 86400.0
WEEK = 7 * DAY

# (name, required input). "topology" attributes survive sanitization.
ATTRIBUTES: tuple[tuple[str, str], ...] = (
    ("size", "topology"),
    ("edge_count", "topology"),
    ("density", "topology"),
    ("depth", "topology"),
    ("width", "topology"),
    ("leaves", "topology"),
    ("leaf_fraction", "topology"),
    ("root_out_degree", "topology"),
    ("internal_mean_out_degree", "topology"),
    ("out_degree_mean", "topology"),
    ("out_degree_median", "topology"),
    ("out_degree_max", "topology"),
    ("out_degree_std", "topology"),
    ("node_depth_mean", "topology"),
    ("node_depth_median", "topology"),
    ("node_depth_max", "topology"),
    ("node_depth_std", "topology"),
    ("assortativity", "topology"),
    ("structural_virality", "topology"),
    ("nodes_within_1d", "time"),
    ("nodes_within_1w", "time"),
    ("fraction_within_1d", "time"),
    ("fraction_within_1w", "time"),
    ("median_followers", "followers"),
    ("median_followees", "followees"),
    ("mean_followers", "followers"),
    ("mean_followees", "followees"),
    ("depth1_fraction", "topology"),
    ("depth_size_ratio", "topology"),
    ("width_depth_ratio", "topology"),
    ("depth1_subtree_max", "topology"),
    ("depth1_subtree_std", "topology"),
)
ATTRIBUTE_NAMES: tuple[str, ...] = tuple(name for name, _ in ATTRIBUTES)
REQUIRES: dict[str, str] = dict(ATTRIBUTES)

# Attributes reported individually as threshold baselines.
THRESHOLD_BASELINES: tuple[str, ...] = (
    "size", "depth", "width", "root_out_degree", "leaves",
    "nodes_within_1d", "nodes_within_1w", "median_followers", "median_followees",
)


def subtree_sizes(c: Cascade) -> list[int]:
    sizes = [1] * c.n
    for v in range(c.n - 1, 0, -1):  # BFS order: children after parents
        sizes[c.parents[v]] += sizes[v]
    return sizes


def structural_virality(c: Cascade) -> float:
    """Mean undirected distance over all node pairs; 0 for a single node.

    Each edge lies on ``s * (n - s)`` shortest paths, with ``s`` the size of
    the subtree below it.
    """
    n = c.n
    if n < 2:
        return 0.0
    sizes = subtree_sizes(c)
    total = sum(s * (n - s) for s in sizes[1:])
    return total / (n * (n - 1) / 2)


def assortativity(c: Cascade) -> float:
    """Pearson correlation of endpoint total degrees over undirected edges (0 if degenerate)."""
    if c.n < 2:
        return 0.0
    deg = np.array([len(k) + (p >= 0) for k, p in zip(c.children, c.parents)], dtype=float)
    child = np.arange(1, c.n)
    parent = np.asarray(c.parents[1:])
    # both orientations of every edge
    x = np.concatenate([deg[child], deg[parent]])
    y = np.concatenate([deg[parent], deg[child]])
    sx, sy = x.std(), y.std()
    if sx == 0 or sy == 0:
        return 0.0
    return float(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sy))


def _std(values: Sequence[float]) -> float:
    return float(np.std(values)) if values else 0.0


def _topology(c: Cascade) -> dict[str, float]:
    n, m = c.n, c.m
    out_deg = [len(k) for k in c.children]
    depths = c.depths()
    depth = max(depths)
    levels = np.bincount(depths)
    width = int(levels.max())
    leaves = sum(1 for d in out_deg if d == 0)
    internal = [d for d in out_deg if d > 0]
    sizes = subtree_sizes(c)
    d1 = [sizes[v] for v in c.children[0]]
    return {
        "size": n,
        "edge_count": m,
        "density": m / (n * (n - 1)) if n > 1 else 0.0,
        "depth": depth,
        "width": width,
        "leaves": leaves,
        "leaf_fraction": leaves / n,
        "root_out_degree": out_deg[0],
        "internal_mean_out_degree": float(np.mean(internal)) if internal else 0.0,
        "out_degree_mean": float(np.mean(out_deg)),
        "out_degree_median": float(median(out_deg)),
        "out_degree_max": max(out_deg),
        "out_degree_std": _std(out_deg),
        "node_depth_mean": float(np.mean(depths)),
        "node_depth_median": float(median(depths)),
        "node_depth_max": depth,
        "node_depth_std": _std(depths),
        "assortativity": assortativity(c),
        "structural_virality": structural_virality(c),
        "depth1_fraction": (levels[1] if depth >= 1 else 0) / n,
        "depth_size_ratio": depth / n,
        "width_depth_ratio": width / depth if depth else 0.0,
        "depth1_subtree_max": max(d1) if d1 else 0,
        "depth1_subtree_std": _std(d1),
    }


def _node_field(raw: RawCascade, name: str) -> list[int]:
    vals = []
    for nd in raw.nodes:
        v = getattr(nd, name)
        if v is None:
            raise MissingAttributeError(f"cascade {raw.rumor_id!r}: node {nd.id} has no {name} count")
        vals.append(v)
    return vals


def attributes(raw: RawCascade, names: Sequence[str] | None = None) -> dict[str, float]:
    """Compute the named attributes (all 32 by default), in canonical order.

    Raises :class:`MissingAttributeError` rather than defaulting when a
    requested attribute needs node fields the cascade lacks.
    """
    names = ATTRIBUTE_NAMES if names is None else tuple(names)
    unknown = set(names) - set(ATTRIBUTE_NAMES)
    if unknown:
        raise KeyError(f"unknown attributes {sorted(unknown)}")
    need = {REQUIRES[k] for k in names}
    values: dict[str, float] = {}
    if "topology" in need:
        values.update(_topology(sanitize(raw)))
    if "time" in need:
        n = raw.n
        day = sum(1 for nd in raw.nodes if nd.t_offset <= DAY)
        week = sum(1 for nd in raw.nodes if nd.t_offset <= WEEK)
        values.update(nodes_within_1d=day, nodes_within_1w=week,
                      fraction_within_1d=day / n, fraction_within_1w=week / n)
    for fld in ("followers", "followees"):
        if fld in need:
            vals = _node_field(raw, fld)
            values[f"median_{fld}"] = float(median(vals))
            values[f"mean_{fld}"] = float(np.mean(vals))
    out = {k: float(values[k]) for k in names}
    bad = [k for k, v in out.items() if not math.isfinite(v)]
    if bad:
        raise ValueError(f"non-finite attributes {bad} for cascade {raw.rumor_id!r}")
    return out


def attribute_matrix(cascades: Iterable[RawCascade], names: Sequence[str] | None = None) -> np.ndarray:
    names = ATTRIBUTE_NAMES if names is None else tuple(names)
    rows = [list(attributes(raw, names).values()) for raw in cascades]
    return np.asarray(rows, dtype=np.float64).reshape(-1, len(names))


def write_csv(ds: LabeledDataset, path: str | Path, names: Sequence[str] | None = None) -> None:
    names = ATTRIBUTE_NAMES if names is None else tuple(names)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*names, "label", "rumor_id"])
        for raw in ds:
            vals = attributes(raw, names)
            w.writerow([repr(vals[k]) for k in names] + [raw.label, raw.rumor_id])


__all__ = [
    "ATTRIBUTES", "ATTRIBUTE_NAMES", "REQUIRES", "THRESHOLD_BASELINES",
    "assortativity", "attribute_matrix", "attributes", "structural_virality",
    "subtree_sizes", "write_csv",
]
