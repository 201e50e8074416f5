import json
import logging
import math

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cascadewl.cascades import (
    Cascade, DatasetError, InvalidCascadeError, LabeledDataset, RawCascade, RawNode, bfs_positions,
    load_dataset, sanitize, save_dataset, truncate_by_depth, truncate_by_time, validate,
)
from cascadewl.synth import GeneratorConfig, generate

from conftest import parent_arrays, raw_cascades, raw_from_parents
from oracles import bfs_depths, undirected_graph


def test_validate_chain_is_clean():
    assert validate(raw_from_parents([-1, 0, 1])) == []


def test_validate_two_roots():
    raw = RawCascade("r", 0, (RawNode(1, None), RawNode(2, None)))
    problems = validate(raw)
    assert any("multiple roots" in p for p in problems)


def test_validate_self_parent_is_cycle():
    raw = RawCascade("r", 0, (RawNode(0, None), RawNode(5, 5, 1.0)))
    problems = validate(raw)
    assert any("cycle at node 5" in p for p in problems)


def test_validate_names_offending_nodes():
    raw = RawCascade("r", 1, (
        RawNode(0, None), RawNode(1, 0, 1.0), RawNode(1, 0, 2.0), RawNode(3, 99, 3.0), RawNode(4, 0, -1.0),
    ))
    text = " | ".join(validate(raw))
    assert "duplicate id at node 1" in text
    assert "unknown parent 99 at node 3" in text
    assert "negative or non-finite t_offset at node 4" in text


def test_validate_detached_cycle():
    raw = RawCascade("r", 0, (RawNode(0, None), RawNode(1, 2, 1.0), RawNode(2, 1, 1.0)))
    assert any("cycle" in p for p in validate(raw))


def test_validate_root_time_and_label():
    raw = RawCascade("r", 3, (RawNode(0, None, 5.0),))
    text = " ".join(validate(raw))
    assert "root t_offset must be 0" in text and "label must be 0 or 1" in text


def test_out_of_order_times_are_allowed(caplog):
    raw = raw_from_parents([-1, 0, 1], times=[0, 50, 10])
    with caplog.at_level(logging.DEBUG):
        assert validate(raw) == []


def test_sanitize_rejects_invalid():
    with pytest.raises(InvalidCascadeError):
        sanitize(RawCascade("r", 0, (RawNode(1, None), RawNode(2, None))))


def test_sanitize_star_drops_time():
    raw = raw_from_parents([-1, 0, 0, 0, 0, 0], times=[0, 9, 3, 700, 2, 1], followers=[1] * 6)
    c = sanitize(raw)
    assert c.n == 6 and c.m == 5
    assert len(c.children[0]) == 5
    assert c.tags is None
    assert set(vars(c)) == {"parents", "tags", "children"}


@given(raw_cascades())
def test_sanitize_preserves_structure(raw):
    c = sanitize(raw)
    assert c.n == raw.n and c.m == raw.n - 1
    order = bfs_positions(raw)
    new_id = {raw.nodes[old].id: new for new, old in enumerate(order)}
    for nd in raw.nodes:
        expect = -1 if nd.parent is None else new_id[nd.parent]
        assert c.parents[new_id[nd.id]] == expect
    # BFS numbering: depth never decreases with the index
    d = c.depths()
    assert d == sorted(d)
    assert c.parents[0] == -1


@given(raw_cascades())
def test_sanitize_idempotent_on_topology(raw):
    c = sanitize(raw)
    again = sanitize(raw_from_parents(list(c.parents)))
    assert again == c


def test_from_parents_renumbers_bfs():
    c = Cascade.from_parents([2, 2, -1, 0], tags=[5, 6, 7, 8])
    assert c.parents == (-1, 0, 0, 1)
    assert c.tags == (7, 5, 6, 8)


def test_from_parents_rejects_forest():
    with pytest.raises(InvalidCascadeError):
        Cascade.from_parents([-1, -1])


# --- truncation ----------------------------------------------------------


def test_time_truncation_chain():
    raw = raw_from_parents([-1, 0, 1], times=[0, 1800, 7200])
    assert truncate_by_time(raw, 1).n == 2


def test_time_truncation_infinite_is_identity():
    raw = raw_from_parents([-1, 0, 0, 1], times=[0, 10, 1e6, 3e6])
    assert truncate_by_time(raw, math.inf) == raw
    assert truncate_by_time(raw, 1e4) == raw


def test_time_truncation_drops_orphaned_child():
    raw = raw_from_parents([-1, 0, 1], times=[0, 5000, 1000])
    out = truncate_by_time(raw, 0.5)
    assert [nd.id for nd in out.nodes] == [0]


def _component_oracle(raw, limit):
    g = nx.Graph()
    root = next(nd.id for nd in raw.nodes if nd.parent is None)
    kept = {nd.id for nd in raw.nodes if nd.t_offset <= limit}
    g.add_nodes_from(kept)
    g.add_edges_from((nd.id, nd.parent) for nd in raw.nodes if nd.parent in kept and nd.id in kept)
    return nx.node_connected_component(g, root)


@given(raw_cascades(), st.floats(0.01, 200))
def test_time_truncation_matches_component_oracle(raw, hours):
    out = truncate_by_time(raw, hours)
    assert {nd.id for nd in out.nodes} == _component_oracle(raw, 3600 * hours)
    assert validate(out) == []


@given(raw_cascades(), st.floats(0.01, 100), st.floats(0.01, 100))
def test_time_truncation_nested(raw, a, b):
    lo, hi = sorted((a, b))
    small = {nd.id for nd in truncate_by_time(raw, lo).nodes}
    big = {nd.id for nd in truncate_by_time(raw, hi).nodes}
    assert small <= big


def test_time_truncation_rejects_nonpositive():
    with pytest.raises(ValueError):
        truncate_by_time(raw_from_parents([-1]), 0)


def test_depth_truncation_chain():
    c = Cascade((-1, 0, 1, 2))
    assert truncate_by_depth(c, 1).n == 2
    assert truncate_by_depth(c, 3) == c
    assert truncate_by_depth(c, 0).n == 1


def test_depth_truncation_random_tree_matches_bfs_oracle():
    import random
    rng = random.Random(11)
    parents = [-1] + [rng.randrange(v) for v in range(1, 50)]
    c = Cascade.from_parents(parents)
    g = undirected_graph(parents)
    expect = len(nx.single_source_shortest_path_length(g, 0, cutoff=2))
    assert truncate_by_depth(c, 2).n == expect


@given(parent_arrays(max_size=40), st.integers(0, 6), st.integers(0, 6))
def test_depth_truncation_composes(parents, d1, d2):
    c = Cascade.from_parents(parents, list(range(len(parents))))
    assert truncate_by_depth(truncate_by_depth(c, d1), d2) == truncate_by_depth(c, min(d1, d2))


@given(raw_cascades(), st.integers(0, 6))
def test_depth_truncation_raw_matches_sanitized(raw, d):
    out = truncate_by_depth(raw, d)
    assert validate(out) == []
    assert sanitize(out) == truncate_by_depth(sanitize(raw), d)
    depths = bfs_depths(list(sanitize(raw).parents))
    assert out.n == sum(1 for x in depths if x <= d)


# --- JSONL ---------------------------------------------------------------


def test_empty_file_is_empty_dataset(tmp_path):
    p = tmp_path / "empty.jsonl"
    p.write_text("")
    assert len(load_dataset(p)) == 0


def test_single_cascade_file(tmp_path):
    p = tmp_path / "one.jsonl"
    save_dataset([raw_from_parents([-1, 0], times=[0, 3], followers=[1, 2], followees=[3, 4])], p)
    ds = load_dataset(p)
    assert len(ds) == 1 and ds[0].nodes[1].followees == 4


def test_roundtrip_is_byte_identical(tmp_path):
    ds = generate(GeneratorConfig(seed=3, n_cascades=50, size_range=(5, 30)))
    assert len(ds) == 100
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_dataset(ds, a)
    again = load_dataset(a)
    save_dataset(again, b)
    assert a.read_bytes() == b.read_bytes()
    assert again == ds


def test_parse_error_reports_line(tmp_path):
    p = tmp_path / "bad.jsonl"
    good = json.dumps({"rumor_id": "a", "label": 0, "nodes": [{"id": 0, "parent": None, "t_offset_s": 0}]})
    p.write_text(good + "\n{not json\n")
    with pytest.raises(DatasetError, match="line 2"):
        load_dataset(p)


def test_invalid_cascade_reports_line_and_rumor(tmp_path):
    p = tmp_path / "bad.jsonl"
    obj = {"rumor_id": "bad-one", "label": 1, "nodes": [{"id": 0, "parent": None}, {"id": 1, "parent": None}]}
    p.write_text(json.dumps(obj) + "\n")
    with pytest.raises(DatasetError, match="line 1.*bad-one"):
        load_dataset(p)


def test_unknown_fields_strict_and_lenient(tmp_path, caplog):
    p = tmp_path / "extra.jsonl"
    obj = {"rumor_id": "a", "label": 0, "text": "x", "nodes": [{"id": 0, "parent": None, "user": "u"}]}
    p.write_text(json.dumps(obj) + "\n")
    with pytest.raises(DatasetError, match="unknown fields"):
        load_dataset(p, strict=True)
    with caplog.at_level(logging.WARNING):
        ds = load_dataset(p)
    assert len(ds) == 1 and "ignoring unknown fields" in caplog.text


def test_dataset_accessors():
    ds = LabeledDataset([raw_from_parents([-1], rumor_id="x", label=1), raw_from_parents([-1, 0], rumor_id="y")])
    assert ds.labels == [1, 0] and ds.rumor_ids == ["x", "y"]
    assert len(ds[1:]) == 1 and ds.subset([1])[0].rumor_id == "y"
