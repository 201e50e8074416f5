"""Synthetic labeled cascades from depth-dependent Galton-Watson branching.

Three generators:

* :func:`generate` draws each class from its own branching parameters.
* :func:`generate_stat_matched_pair` gives both classes the *same* topology,
  timestamp and degree streams (cascade ``i`` of class 0 and class 1 share
  them), so every untagged attribute is identically distributed across
  classes. The classes differ only in where the followee counts are placed:
  uniformly at random, or sorted so the largest counts land on the deepest
  nodes.
* :func:`generate_planted_motif` attaches two small tag chains per cascade,
  either as connected paths or scattered as separate leaves, and labels the
  cascade by the XOR of the two arrangements. Tag histograms are identical
  in every case; only WL iterations >= 1 can see the arrangement.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .cascades import LabeledDataset, RawCascade, RawNode

PLACEMENTS = ("uniform", "deep")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BranchingParams:
    # offspring_weights[d][k]: P(k children) for a node at depth d; the last row repeats
    offspring_weights: tuple[tuple[float, ...], ...] = (
        (0.0, 0.0, 0.0, 0.1, 0.15, 0.2, 0.2, 0.15, 0.1, 0.1),
        (0.3, 0.25, 0.2, 0.15, 0.1),
        (0.5, 0.25, 0.15, 0.1),
    )
    # P(followee bin b); a node in bin b gets followees uniform in [2^b - 1, 2^(b+1) - 2]
    followee_bin_weights: tuple[float, ...] = (0.0, 0.0, 0.1, 0.2, 0.2, 0.2, 0.15, 0.1, 0.05)
    follower_log_mean: float = 5.0
    follower_log_sd: float = 1.5
    time_scale: float = 3 * 3600.0
    tag_placement: str = "uniform"

    def validate(self) -> None:
        if not self.offspring_weights:
            raise ConfigError("offspring_weights must not be empty")
        for row in (*self.offspring_weights, self.followee_bin_weights):
            if any(w < 0 for w in row) or not math.isclose(sum(row), 1.0, abs_tol=1e-9):
                raise ConfigError(f"probability weights must be non-negative and sum to 1: {row}")
        if self.time_scale <= 0:
            raise ConfigError("time_scale must be positive")
        if self.tag_placement not in PLACEMENTS:
            raise ConfigError(f"tag_placement must be one of {PLACEMENTS}")


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    n_cascades: int = 100
    size_range: tuple[int, int] = (25, 60)
    class0_params: BranchingParams = field(default_factory=BranchingParams)
    class1_params: BranchingParams = field(default_factory=lambda: BranchingParams(tag_placement="deep"))
    stat_matched: bool = True
    cascades_per_rumor: int = 3
    max_attempts: int = 10_000

    def validate(self) -> None:
        lo, hi = self.size_range
        if lo < 1 or hi < lo:
            raise ConfigError(f"invalid size_range {self.size_range}")
        if self.n_cascades < 0 or self.cascades_per_rumor < 1:
            raise ConfigError("n_cascades must be >= 0 and cascades_per_rumor >= 1")
        self.class0_params.validate()
        self.class1_params.validate()

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "GeneratorConfig":
        obj = dict(obj)
        known = {f for f in cls.__dataclass_fields__}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown generator config keys {sorted(extra)}")
        for key in ("class0_params", "class1_params"):
            if key in obj and isinstance(obj[key], dict):
                p = dict(obj[key])
                bad = set(p) - set(BranchingParams.__dataclass_fields__)
                if bad:
                    raise ConfigError(f"unknown keys in {key}: {sorted(bad)}")
                if "offspring_weights" in p:
                    p["offspring_weights"] = tuple(tuple(r) for r in p["offspring_weights"])
                if "followee_bin_weights" in p:
                    p["followee_bin_weights"] = tuple(p["followee_bin_weights"])
                obj[key] = BranchingParams(**p)
        if "size_range" in obj:
            obj["size_range"] = tuple(obj["size_range"])
        return cls(**obj)


def load_config(path: str | Path) -> GeneratorConfig:
    """Read a JSON key-value generator config (see ``configs/``)."""
    return GeneratorConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, *stream]))


STREAM_TOPOLOGY, STREAM_TAGS = 1, 2


@dataclass
class _Tree:
    parents: list[int]
    depths: list[int]
    t_offset: list[float]
    followers: list[int]
    followees: list[int]


def _grow(params: BranchingParams, size_range: Sequence[int], rng: np.random.Generator, max_attempts: int) -> list[int]:
    """BFS growth capped at the max size; undersized trees are rejected and redrawn."""
    lo, hi = size_range
    rows = [np.asarray(r, dtype=float) for r in params.offspring_weights]
    for _ in range(max_attempts):
        parents = [-1]
        depths = [0]
        frontier = 0
        while frontier < len(parents) and len(parents) < hi:
            d = depths[frontier]
            w = rows[min(d, len(rows) - 1)]
            k = int(rng.choice(w.size, p=w))
            for _ in range(min(k, hi - len(parents))):
                parents.append(frontier)
                depths.append(d + 1)
            frontier += 1
        if len(parents) >= lo:
            return parents
    raise ConfigError(f"could not reach minimum size {lo} in {max_attempts} attempts; adjust offspring_weights")


def _draw_followees(weights: Sequence[float], n: int, rng: np.random.Generator) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    bins = rng.choice(w.size, size=n, p=w)
    lo = (1 << bins) - 1
    width = 1 << bins  # values lo .. lo + width - 1 all share bin b
    return lo + (rng.random(n) * width).astype(np.int64)


def _base_tree(params: BranchingParams, size_range, rng, max_attempts) -> _Tree:
    parents = _grow(params, size_range, rng, max_attempts)
    n = len(parents)
    depths = [0] * n
    t = [0.0] * n
    gaps = rng.exponential(params.time_scale, size=n)
    for v in range(1, n):
        depths[v] = depths[parents[v]] + 1
        t[v] = t[parents[v]] + float(gaps[v])
    followers = np.floor(rng.lognormal(params.follower_log_mean, params.follower_log_sd, size=n)).astype(np.int64)
    followees = _draw_followees(params.followee_bin_weights, n, rng)
    return _Tree(parents, depths, t, followers.tolist(), followees.tolist())


def _place(followees: Sequence[int], depths: Sequence[int], placement: str, rng) -> list[int]:
    vals = np.asarray(followees)
    if placement == "uniform":
        return rng.permutation(vals).tolist()
    # deep: sort values ascending, then hand them out by depth (random order within a level)
    order = np.lexsort((rng.random(len(depths)), np.asarray(depths)))
    out = np.empty_like(vals)
    out[order] = np.sort(vals)
    return out.tolist()


def _to_raw(tree: _Tree, followees: Sequence[int], rumor_id: str, label: int) -> RawCascade:
    nodes = tuple(
        RawNode(v, None if p < 0 else p, round(tree.t_offset[v], 3), int(tree.followers[v]), int(followees[v]))
        for v, p in enumerate(tree.parents)
    )
    return RawCascade(rumor_id, label, nodes)


def _rumor_id(label: int, index: int, per_rumor: int) -> str:
    return f"r{label}-{index // per_rumor:05d}"


def generate(config: GeneratorConfig) -> LabeledDataset:
    """``n_cascades`` per class; class 0 first, then class 1."""
    config.validate()
    if config.stat_matched:
        return generate_stat_matched_pair(config)
    out = []
    for label, params in ((0, config.class0_params), (1, config.class1_params)):
        for i in range(config.n_cascades):
            tree = _base_tree(params, config.size_range, _rng(config.seed, STREAM_TOPOLOGY, label, i), config.max_attempts)
            fol = _place(tree.followees, tree.depths, params.tag_placement, _rng(config.seed, STREAM_TAGS, label, i))
            out.append(_to_raw(tree, fol, _rumor_id(label, i, config.cascades_per_rumor), label))
    return LabeledDataset(out)


def generate_stat_matched_pair(config: GeneratorConfig) -> LabeledDataset:
    """Both classes share one topology stream (class 0's branching parameters)."""
    config.validate()
    if not config.stat_matched:
        raise ConfigError("generate_stat_matched_pair requires stat_matched = true")
    trees = [
        _base_tree(config.class0_params, config.size_range, _rng(config.seed, STREAM_TOPOLOGY, i), config.max_attempts)
        for i in range(config.n_cascades)
    ]
    out = []
    for label, params in ((0, config.class0_params), (1, config.class1_params)):
        for i, tree in enumerate(trees):
            fol = _place(tree.followees, tree.depths, params.tag_placement, _rng(config.seed, STREAM_TAGS, label, i))
            out.append(_to_raw(tree, fol, _rumor_id(label, i, config.cascades_per_rumor), label))
    return LabeledDataset(out)


# followee values of the planted chain nodes, one chain per motif (bins 10/6/12 and 14/6/16)
MOTIF_FOLLOWEES = ((1 << 10, 1 << 6, 1 << 12), (1 << 14, 1 << 6, 1 << 16))


def generate_planted_motif(config: GeneratorConfig) -> LabeledDataset:
    """XOR of two planted chain motifs; ``2 * n_cascades`` cascades, balanced labels.

    The base tree is drawn within ``size_range`` shrunk by the six planted
    nodes, so final sizes stay within ``size_range``.
    """
    config.validate()
    lo, hi = config.size_range
    planted = sum(len(m) for m in MOTIF_FOLLOWEES)
    base_range = (max(1, lo - planted), hi - planted)
    if base_range[1] < base_range[0]:
        raise ConfigError(f"size_range {config.size_range} too small for {planted} planted nodes")
    params = config.class0_params
    per_label: dict[int, int] = {0: 0, 1: 0}
    out = []
    for i in range(2 * config.n_cascades):
        arranged = ((i % 4) >> 1, i % 2)  # cycles (0,0) (0,1) (1,0) (1,1)
        label = arranged[0] ^ arranged[1]
        rng = _rng(config.seed, STREAM_TOPOLOGY, i)
        tree = _base_tree(params, base_range, rng, config.max_attempts)
        fol = list(tree.followees)
        n_base = len(tree.parents)  # motifs only hang off base-tree nodes
        for motif, chained in zip(MOTIF_FOLLOWEES, arranged):
            n0 = len(tree.parents)
            if chained:
                attach = [int(rng.integers(n_base)), n0, n0 + 1]
            else:
                attach = [int(x) for x in rng.integers(n_base, size=len(motif))]
            for p, f in zip(attach, motif):
                tree.parents.append(p)
                tree.depths.append(tree.depths[p] + 1)
                tree.t_offset.append(tree.t_offset[p] + float(rng.exponential(params.time_scale)))
                tree.followers.append(int(rng.lognormal(params.follower_log_mean, params.follower_log_sd)))
                fol.append(f)
        rid = _rumor_id(label, per_label[label], config.cascades_per_rumor)
        per_label[label] += 1
        out.append(_to_raw(tree, fol, rid, label))
    return LabeledDataset(out)
