"""Cascade data model: raw retweet trees, sanitized topology, truncation, JSONL I/O.

A raw cascade is a list of retweet events, each pointing at the event it was
retweeted from. The sanitized :class:`Cascade` keeps only the tree shape
(plus optional coarse tags), with nodes renumbered in BFS order from the root.
"""
from __future__ import annotations

import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

log = logging.getLogger(__name__)

NODE_FIELDS = ("id", "parent", "t_offset_s", "followers", "followees")
CASCADE_FIELDS = ("rumor_id", "label", "nodes")


class InvalidCascadeError(ValueError):
    """Raised when a raw cascade is not a valid arborescence."""


class DatasetError(ValueError):
    """Raised on malformed dataset files; message carries the line number."""


@dataclass(frozen=True)
class RawNode:
    id: int
    parent: int | None
    t_offset: float = 0.0
    followers: int | None = None
    followees: int | None = None


@dataclass(frozen=True)
class RawCascade:
    rumor_id: str
    label: int
    nodes: tuple[RawNode, ...]

    def __post_init__(self):
        if not isinstance(self.nodes, tuple):
            object.__setattr__(self, "nodes", tuple(self.nodes))

    @property
    def n(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class Cascade:
    """Sanitized arborescence. ``parents[0] == -1``; node ``i`` has depth >= depth of ``i-1``."""

    parents: tuple[int, ...]
    tags: tuple[int, ...] | None = None
    children: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        parents = tuple(int(p) for p in self.parents)
        object.__setattr__(self, "parents", parents)
        if self.tags is not None:
            tags = tuple(int(t) for t in self.tags)
            if len(tags) != len(parents):
                raise ValueError("tags must cover every node")
            object.__setattr__(self, "tags", tags)
        kids: list[list[int]] = [[] for _ in parents]
        for v, p in enumerate(parents):
            if p >= 0:
                kids[p].append(v)
        object.__setattr__(self, "children", tuple(tuple(k) for k in kids))

    @property
    def root(self) -> int:
        return 0

    @property
    def n(self) -> int:
        return len(self.parents)

    @property
    def m(self) -> int:
        return len(self.parents) - 1

    def depths(self) -> list[int]:
        d = [0] * self.n
        for v in range(1, self.n):
            d[v] = d[self.parents[v]] + 1
        return d

    def depth(self) -> int:
        return max(self.depths())

    def with_tags(self, tags: Sequence[int]) -> "Cascade":
        return Cascade(self.parents, tuple(tags))

    @classmethod
    def from_parents(cls, parents: Sequence[int], tags: Sequence[int] | None = None) -> "Cascade":
        """Build from an arbitrary parent array (root marked -1), renumbering to BFS order."""
        n = len(parents)
        roots = [v for v, p in enumerate(parents) if p < 0]
        if len(roots) != 1:
            raise InvalidCascadeError(f"expected one root, found {len(roots)}")
        kids: list[list[int]] = [[] for _ in range(n)]
        for v, p in enumerate(parents):
            if p >= 0:
                kids[p].append(v)
        order = _bfs_order(roots[0], kids)
        if len(order) != n:
            raise InvalidCascadeError("parent array is not connected")
        new_id = {old: new for new, old in enumerate(order)}
        new_parents = [-1 if parents[old] < 0 else new_id[parents[old]] for old in order]
        new_tags = None if tags is None else [tags[old] for old in order]
        return cls(tuple(new_parents), None if new_tags is None else tuple(new_tags))


@dataclass
class LabeledDataset:
    """Raw cascades with their labels and rumor ids (carried on each cascade)."""

    cascades: list[RawCascade] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.cascades)

    def __iter__(self) -> Iterator[RawCascade]:
        return iter(self.cascades)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return LabeledDataset(self.cascades[i])
        return self.cascades[i]

    @property
    def labels(self) -> list[int]:
        return [c.label for c in self.cascades]

    @property
    def rumor_ids(self) -> list[str]:
        return [c.rumor_id for c in self.cascades]

    def subset(self, indices: Iterable[int]) -> "LabeledDataset":
        return LabeledDataset([self.cascades[i] for i in indices])


def _bfs_order(root: int, kids: Sequence[Sequence[int]]) -> list[int]:
    order = [root]
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for c in kids[v]:
            order.append(c)
            queue.append(c)
    return order


# --- validation ----------------------------------------------------------


def validate(raw: RawCascade) -> list[str]:
    """Return the list of structural violations; empty iff ``raw`` is a valid cascade."""
    problems: list[str] = []
    if raw.label not in (0, 1):
        problems.append(f"label must be 0 or 1, got {raw.label!r}")
    if not raw.nodes:
        return problems + ["empty cascade"]

    seen: dict[int, RawNode] = {}
    for node in raw.nodes:
        if node.id in seen:
            problems.append(f"duplicate id at node {node.id}")
        seen[node.id] = node
        if not (node.t_offset >= 0 and math.isfinite(node.t_offset)):
            problems.append(f"negative or non-finite t_offset at node {node.id}")
        for attr in ("followers", "followees"):
            val = getattr(node, attr)
            if val is not None and val < 0:
                problems.append(f"negative {attr} at node {node.id}")

    roots = [nd.id for nd in raw.nodes if nd.parent is None]
    if len(roots) > 1:
        problems.append("multiple roots: nodes " + ", ".join(map(str, roots)))
    elif not roots:
        problems.append("no root")
    else:
        root = seen[roots[0]]
        if root.t_offset != 0:
            problems.append(f"root t_offset must be 0 at node {root.id}")

    for nd in raw.nodes:
        if nd.parent is not None and nd.parent not in seen:
            problems.append(f"unknown parent {nd.parent} at node {nd.id}")

    # Walk parent pointers; 1 = on current path, 2 = reaches a root, 3 = stuck in a cycle.
    state: dict[int, int] = {}
    for start in seen:
        if state.get(start):
            continue
        path = []
        v = start
        while v in seen and not state.get(v):
            state[v] = 1
            path.append(v)
            v = seen[v].parent
            if v is None:
                break
        final = 2
        if v is not None and state.get(v) == 1:
            problems.append(f"cycle at node {v}")
            final = 3
        elif v is not None and state.get(v) == 3:
            problems.append(f"unreachable from root at node {start}")
            final = 3
        for u in path:
            state[u] = final

    if not problems:
        for nd in raw.nodes:
            if nd.parent is not None and nd.t_offset < seen[nd.parent].t_offset:
                log.debug("node %s retweeted before its parent in cascade %s", nd.id, raw.rumor_id)
    return problems


def _require_valid(raw: RawCascade) -> None:
    problems = validate(raw)
    if problems:
        raise InvalidCascadeError(f"cascade {raw.rumor_id!r}: " + "; ".join(problems))


def _raw_index(raw: RawCascade) -> tuple[list[int], list[list[int]]]:
    """Return (BFS order of node positions, children lists by position)."""
    pos = {nd.id: i for i, nd in enumerate(raw.nodes)}
    kids: list[list[int]] = [[] for _ in raw.nodes]
    root = -1
    for i, nd in enumerate(raw.nodes):
        if nd.parent is None:
            root = i
        else:
            kids[pos[nd.parent]].append(i)
    return _bfs_order(root, kids), kids


def sanitize(raw: RawCascade) -> Cascade:
    """Strip times, identities and degree counts, keeping only the tree shape."""
    _require_valid(raw)
    order, _ = _raw_index(raw)
    pos = {nd.id: i for i, nd in enumerate(raw.nodes)}
    new_id = {old: new for new, old in enumerate(order)}
    parents = []
    for old in order:
        p = raw.nodes[old].parent
        parents.append(-1 if p is None else new_id[pos[p]])
    return Cascade(tuple(parents))


def bfs_positions(raw: RawCascade) -> list[int]:
    """Positions of ``raw.nodes`` in the order :func:`sanitize` assigns indices."""
    order, _ = _raw_index(raw)
    return order


# --- truncation ----------------------------------------------------------


def truncate_by_time(raw: RawCascade, t_hours: float) -> RawCascade:
    """Keep nodes posted within ``t_hours`` of the root whose whole root path is kept."""
    if not t_hours > 0:
        raise ValueError(f"t_hours must be positive, got {t_hours}")
    _require_valid(raw)
    limit = 3600.0 * t_hours
    order, kids = _raw_index(raw)
    root = order[0]
    if raw.nodes[root].t_offset > limit:
        raise InvalidCascadeError("root excluded by time truncation")
    keep = [False] * raw.n
    keep[root] = True
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for c in kids[v]:
            if raw.nodes[c].t_offset <= limit:
                keep[c] = True
                queue.append(c)
    if all(keep):
        return raw
    return RawCascade(raw.rumor_id, raw.label, tuple(nd for nd, k in zip(raw.nodes, keep) if k))


def truncate_by_depth(c, d: int):
    """Keep nodes within ``d`` edges of the root. Accepts a :class:`Cascade` or :class:`RawCascade`."""
    if d < 0:
        raise ValueError(f"depth must be non-negative, got {d}")
    if isinstance(c, RawCascade):
        _require_valid(c)
        order, kids = _raw_index(c)
        depth = {order[0]: 0}
        for v in order:
            for ch in kids[v]:
                depth[ch] = depth[v] + 1
        if max(depth.values()) <= d:
            return c
        return RawCascade(c.rumor_id, c.label, tuple(nd for i, nd in enumerate(c.nodes) if depth[i] <= d))
    depths = c.depths()
    if depths[-1] <= d:
        return c
    # BFS numbering makes the kept set a prefix.
    k = sum(1 for x in depths if x <= d)
    return Cascade(c.parents[:k], None if c.tags is None else c.tags[:k])


# --- JSONL I/O -----------------------------------------------------------


def cascade_to_dict(raw: RawCascade) -> dict:
    nodes = []
    for nd in raw.nodes:
        rec = {"id": nd.id, "parent": nd.parent, "t_offset_s": float(nd.t_offset)}
        if nd.followers is not None:
            rec["followers"] = nd.followers
        if nd.followees is not None:
            rec["followees"] = nd.followees
        nodes.append(rec)
    return {"rumor_id": raw.rumor_id, "label": raw.label, "nodes": nodes}


def cascade_from_dict(obj: dict, strict: bool = False, where: str = "") -> RawCascade:
    if not isinstance(obj, dict):
        raise DatasetError(f"{where}expected a JSON object")
    _check_fields(obj, CASCADE_FIELDS, strict, where)
    for key in CASCADE_FIELDS:
        if key not in obj:
            raise DatasetError(f"{where}missing field {key!r}")
    nodes = []
    for rec in obj["nodes"]:
        if not isinstance(rec, dict):
            raise DatasetError(f"{where}node entries must be objects")
        _check_fields(rec, NODE_FIELDS, strict, where)
        try:
            nodes.append(RawNode(
                id=_as_int(rec["id"]),
                parent=None if rec.get("parent") is None else _as_int(rec["parent"]),
                t_offset=float(rec.get("t_offset_s", 0.0)),
                followers=None if rec.get("followers") is None else _as_int(rec["followers"]),
                followees=None if rec.get("followees") is None else _as_int(rec["followees"]),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"{where}bad node record {rec!r}: {exc}") from None
    label = obj["label"]
    if label not in (0, 1) or isinstance(label, bool):
        raise DatasetError(f"{where}label must be 0 or 1")
    return RawCascade(str(obj["rumor_id"]), int(label), tuple(nodes))


def _as_int(x) -> int:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or int(x) != x:
        raise ValueError(f"expected integer, got {x!r}")
    return int(x)


def _check_fields(obj: dict, allowed: tuple[str, ...], strict: bool, where: str) -> None:
    extra = sorted(set(obj) - set(allowed))
    if not extra:
        return
    if strict:
        raise DatasetError(f"{where}unknown fields {extra}")
    log.warning("%signoring unknown fields %s", where, extra)


def dumps_cascade(raw: RawCascade) -> str:
    return json.dumps(cascade_to_dict(raw), separators=(",", ":"))


def iter_dataset(path: str | Path, strict: bool = False) -> Iterator[RawCascade]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            where = f"line {lineno}: "
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{where}invalid JSON ({exc.msg})") from None
            raw = cascade_from_dict(obj, strict=strict, where=where)
            problems = validate(raw)
            if problems:
                raise DatasetError(f"{where}cascade {raw.rumor_id!r} invalid: " + "; ".join(problems))
            yield raw


def load_dataset(path: str | Path, strict: bool = False) -> LabeledDataset:
    return LabeledDataset(list(iter_dataset(path, strict=strict)))


def save_dataset(ds: LabeledDataset | Iterable[RawCascade], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for raw in ds:
            fh.write(dumps_cascade(raw))
            fh.write("\n")
