"""Coarse node tags: log-binned degree counts."""
from __future__ import annotations

from dataclasses import dataclass

from .cascades import Cascade, RawCascade, bfs_positions, sanitize

SOURCES = ("cascade", "graph", "constant")


class MissingAttributeError(ValueError):
    """A tagging scheme or attribute needs a node field the data lacks."""


@dataclass(frozen=True)
class TagScheme:
    source: str = "cascade"
    log_base: int = 2
    max_bin: int = 30

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown tag source {self.source!r}; expected one of {SOURCES}")
        if self.log_base < 2:
            raise ValueError("log_base must be >= 2")
        if self.max_bin < 0:
            raise ValueError("max_bin must be >= 0")

    @property
    def alphabet(self) -> range:
        return range(1 if self.source == "constant" else self.max_bin + 1)


def bin_degree(degree: int, scheme: TagScheme = TagScheme()) -> int:
    """``min(floor(log_base(degree + 1)), max_bin)`` in exact integer arithmetic."""
    if degree < 0:
        raise ValueError(f"degree must be non-negative, got {degree}")
    x = int(degree) + 1
    b = 0
    while x >= scheme.log_base:
        x //= scheme.log_base
        b += 1
    return min(b, scheme.max_bin)


def apply_tags(raw: RawCascade, scheme: TagScheme) -> Cascade:
    """Sanitize ``raw`` and tag each node from the scheme's degree source."""
    c = sanitize(raw)
    if scheme.source == "constant":
        return c.with_tags([0] * c.n)
    if scheme.source == "cascade":
        return c.with_tags([bin_degree(len(k), scheme) for k in c.children])
    tags = []
    for pos in bfs_positions(raw):
        nd = raw.nodes[pos]
        if nd.followees is None:
            raise MissingAttributeError(
                f"cascade {raw.rumor_id!r}: node {nd.id} has no followees count (needed for graph tags)"
            )
        tags.append(bin_degree(nd.followees, scheme))
    return c.with_tags(tags)
