from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from cascadewl.cascades import Cascade, RawCascade, RawNode  # noqa: E402

settings.register_profile("cascadewl", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("cascadewl")

ACCEPTANCE_LINES: list[str] = []


@st.composite
def parent_arrays(draw, min_size=1, max_size=30):
    """Random recursive tree, then a random relabeling so the root is anywhere."""
    n = draw(st.integers(min_size, max_size))
    attach = [draw(st.integers(0, v - 1)) for v in range(1, n)]
    perm = draw(st.permutations(range(n)))
    parents = [-1] * n
    for v, p in enumerate(attach, 1):
        parents[perm[v]] = perm[p]
    return parents


@st.composite
def tagged_cascades(draw, min_size=1, max_size=30, n_tags=4):
    parents = draw(parent_arrays(min_size, max_size))
    tags = draw(st.lists(st.integers(0, n_tags - 1), min_size=len(parents), max_size=len(parents)))
    return Cascade.from_parents(parents, tags)


@st.composite
def raw_cascades(draw, min_size=1, max_size=25, label=None):
    parents = draw(parent_arrays(min_size, max_size))
    n = len(parents)
    ids = draw(st.lists(st.integers(0, 10_000), min_size=n, max_size=n, unique=True))
    times = draw(st.lists(st.floats(0, 5e5, allow_nan=False), min_size=n, max_size=n))
    fol = draw(st.lists(st.integers(0, 10**6), min_size=2 * n, max_size=2 * n))
    y = draw(st.integers(0, 1)) if label is None else label
    nodes = []
    for v, p in enumerate(parents):
        t = 0.0 if p < 0 else times[v]
        nodes.append(RawNode(ids[v], None if p < 0 else ids[p], t, fol[2 * v], fol[2 * v + 1]))
    order = draw(st.permutations(range(n)))
    return RawCascade(f"r{draw(st.integers(0, 50))}", y, tuple(nodes[i] for i in order))


def raw_from_parents(parents, times=None, followers=None, followees=None, rumor_id="r", label=0) -> RawCascade:
    nodes = []
    for v, p in enumerate(parents):
        nodes.append(RawNode(
            v, None if p < 0 else p,
            0.0 if times is None else float(times[v]),
            None if followers is None else followers[v],
            None if followees is None else followees[v],
        ))
    return RawCascade(rumor_id, label, tuple(nodes))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_lines():
    return ACCEPTANCE_LINES
