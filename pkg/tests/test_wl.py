from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cascadewl import wl
from cascadewl.cascades import Cascade
from cascadewl.wl import (
    UNKNOWN, FeatureIndex, Interner, InternerMismatchError, WLConfig, composite_label, embed, embed_dataset,
    embed_many, gram_matrix, kernel, node_tags, read_triplets, wl_relabel_step, write_index, write_triplets,
)

from conftest import tagged_cascades
from oracles import canonical_partition, decode, naive_wl_counts, nx_wl_partitions

A = 5  # an arbitrary tag value


def path3():
    return Cascade((-1, 0, 1), (A, A, A))


def star(k, tag=A):
    return Cascade((-1,) + (0,) * k, (tag,) * (k + 1))


def decoded_counts(fv: wl.FeatureVector) -> Counter:
    memo = {}
    return Counter({(i, decode(fv.interner, i, t, memo)): v for (i, t), v in fv.counts.items()})


# --- relabel step --------------------------------------------------------


def test_relabel_single_node():
    it = Interner()
    assert wl_relabel_step(Cascade((-1,), (A,)), [A], it) == [it.intern(1, f"{A}|")]
    assert it.label(1, 0) == "5|"


def test_relabel_path_endpoints_share_tag():
    it = Interner()
    new = wl_relabel_step(path3(), [A, A, A], it)
    assert new[0] == new[2] != new[1]
    assert it.label(1, new[1]) == "5|5,5"


def test_relabel_star_leaves_share_tag():
    c = star(6)
    new = wl_relabel_step(c, list(c.tags), Interner())
    assert len(set(new[1:])) == 1 and new[0] != new[1]


def test_relabel_children_neighborhood():
    it = Interner()
    new = wl_relabel_step(path3(), [A, A, A], it, neighborhood="children")
    # root and middle see one child, the leaf sees none
    assert new[0] == new[1] != new[2]


def test_relabel_needs_every_tag():
    with pytest.raises(ValueError):
        wl_relabel_step(path3(), [A, A], Interner())


def test_composite_label_format():
    assert composite_label(3, [0, 2, 2, 10]) == "3|0,2,2,10"
    assert composite_label(7, []) == "7|"


@given(tagged_cascades(max_size=25, n_tags=3))
def test_relabel_equal_iff_same_signature(c):
    it = Interner()
    new = wl_relabel_step(c, list(c.tags), it)
    sig = []
    for v in range(c.n):
        nb = [c.tags[u] for u in c.children[v]] + ([c.tags[c.parents[v]]] if c.parents[v] >= 0 else [])
        sig.append((c.tags[v], tuple(sorted(nb))))
    for a in range(c.n):
        for b in range(c.n):
            assert (new[a] == new[b]) == (sig[a] == sig[b])


# --- embedding -----------------------------------------------------------


def test_embed_single_node():
    assert embed(Cascade((-1,), (A,)), WLConfig(0)).counts == {(0, A): 1}


def test_embed_path_h1():
    fv = embed(path3(), WLConfig(1))
    it = fv.interner
    t_end, t_mid = it.intern(1, "5|5"), it.intern(1, "5|5,5")
    assert t_end != t_mid
    assert fv.counts == {(0, A): 3, (1, t_end): 2, (1, t_mid): 1}


def test_embed_constant_star_h0():
    assert embed(star(4, 0), WLConfig(0)).counts == {(0, 0): 5}


@given(tagged_cascades(max_size=30), st.integers(0, 4), st.sampled_from(wl.NEIGHBORHOODS))
def test_embed_matches_naive_strings(c, h, nbh):
    fv = embed(c, WLConfig(h, nbh))
    assert decoded_counts(fv) == naive_wl_counts(list(c.parents), list(c.tags), h, nbh)


@given(tagged_cascades(max_size=30), st.integers(0, 4))
def test_partitions_match_networkx(c, h):
    rounds = node_tags([c], WLConfig(h), Interner())
    expect = nx_wl_partitions(list(c.parents), list(c.tags), h)
    assert [canonical_partition(r.tolist()) for r in rounds] == expect


@given(tagged_cascades(max_size=30), st.integers(1, 4))
def test_partitions_refine(c, h):
    rounds = node_tags([c], WLConfig(h), Interner())
    for prev, cur in zip(rounds, rounds[1:]):
        cls: dict = {}
        for a, b in zip(cur.tolist(), prev.tolist()):
            assert cls.setdefault(a, b) == b


@given(tagged_cascades(max_size=30), st.integers(0, 4), st.randoms(use_true_random=False))
def test_isomorphism_invariance(c, h, rnd):
    perm = list(range(c.n))
    rnd.shuffle(perm)
    parents = [-1] * c.n
    tags = [0] * c.n
    for v in range(c.n):
        parents[perm[v]] = -1 if c.parents[v] < 0 else perm[c.parents[v]]
        tags[perm[v]] = c.tags[v]
    other = Cascade.from_parents(parents, tags)
    a, b = embed_many([c, other], WLConfig(h), Interner())
    assert a.counts == b.counts
    for i in range(h + 1):
        assert a.iteration_mass(i) == c.n


@given(st.lists(tagged_cascades(max_size=15, n_tags=3), min_size=1, max_size=6), st.integers(0, 3))
def test_batch_equals_one_at_a_time(cs, h):
    it_a, it_b = Interner(), Interner()
    batch = embed_many(cs, WLConfig(h), it_a)
    single = [embed_many([c], WLConfig(h), it_b)[0] for c in cs]
    assert [f.counts for f in batch] == [f.counts for f in single]
    assert it_a.to_dict() == it_b.to_dict()


@given(st.lists(tagged_cascades(max_size=20, n_tags=3), min_size=1, max_size=5), st.integers(1, 3),
       st.sampled_from(wl.NEIGHBORHOODS))
def test_array_route_equals_exact_route(cs, h, nbh):
    it_a, it_b = Interner(), Interner()
    batch = wl._Batch(cs, nbh)
    adj = wl._neighbor_lists(cs, nbh)
    ta = wl._initial_tags(cs)
    tb = ta.tolist()
    for i in range(1, h + 1):
        ta = batch.relabel(ta, it_a, i)
        tb = wl._relabel_exact(adj, tb, it_b, i)
        assert ta.tolist() == tb
    assert it_a.to_dict() == it_b.to_dict()


def test_hash_collisions_fall_back_to_exact(monkeypatch):
    # a zero base keeps only the first neighbor tag in the hash, forcing collisions
    monkeypatch.setattr(wl, "_B1", np.uint64(0))
    calls = []
    real = wl._relabel_exact
    monkeypatch.setattr(wl, "_relabel_exact", lambda *a: calls.append(1) or real(*a))
    c = Cascade((-1, 0, 0, 1, 1, 2, 2), (0, 1, 1, 0, 0, 0, 1))
    fv = embed(c, WLConfig(2))
    assert calls
    assert decoded_counts(fv) == naive_wl_counts(list(c.parents), list(c.tags), 2)


def test_sorting_uses_numeric_order():
    c = Cascade((-1, 0, 0), (1, 10, 2))
    it = Interner()
    wl_relabel_step(c, list(c.tags), it)
    assert it.label(1, 0) == "1|2,10"


def test_embed_requires_tags():
    with pytest.raises(ValueError):
        embed(Cascade((-1, 0)))


def test_wlconfig_validation():
    with pytest.raises(ValueError):
        WLConfig(-1)
    with pytest.raises(ValueError):
        WLConfig(1, "parents")


# --- interner ------------------------------------------------------------


def test_interner_injective_and_ordered():
    it = Interner()
    assert it.intern_many(1, ["a", "b", "a", "c"]) == [0, 1, 0, 2]
    assert [it.label(1, j) for j in range(3)] == ["a", "b", "c"]
    assert it.size(1) == 3 and it.size(2) == 0 and it.label(0, 4) == "4"


def test_interner_frozen_maps_unseen_to_unknown():
    it = Interner()
    it.intern(1, "x")
    it.freeze()
    assert it.intern_many(1, ["x", "y"]) == [0, UNKNOWN]
    assert it.size(1) == 1


def test_interner_roundtrip():
    it = Interner()
    it.intern_many(1, ["a", "b"])
    it.intern_many(2, ["q"])
    back = Interner.from_dict(it.to_dict())
    assert back.to_dict() == it.to_dict()


def test_interner_rejects_iteration_zero():
    with pytest.raises(ValueError):
        Interner().intern(0, "x")


# --- kernel --------------------------------------------------------------


def test_kernel_identical_single_nodes():
    assert kernel(Cascade((-1,), (A,)), Cascade((-1,), (A,)), WLConfig(0)) == 1.0


def test_kernel_constant_stars():
    assert kernel(star(2, 0), star(3, 0), WLConfig(0)) == 12.0


def test_kernel_disjoint_alphabets():
    a, b = embed_many([star(3, 1), star(3, 2)], WLConfig(2), Interner())
    assert kernel(a, b) == 0.0


def test_kernel_mismatched_interners():
    with pytest.raises(InternerMismatchError):
        kernel(embed(star(2)), embed(star(2)))


@given(tagged_cascades(max_size=20), tagged_cascades(max_size=20), st.integers(0, 3))
def test_kernel_symmetric_and_norm(a, b, h):
    fa, fb = embed_many([a, b], WLConfig(h), Interner())
    assert kernel(fa, fb) == kernel(fb, fa)
    assert kernel(fa, fa) == sum(v * v for v in fa.counts.values())


# --- dataset matrix ------------------------------------------------------


def test_dataset_of_one_equals_embed():
    c = Cascade((-1, 0, 0, 1), (1, 0, 2, 1))
    X, index = embed_dataset([c], WLConfig(2))
    fv = embed(c, WLConfig(2))
    assert X.shape[0] == 1
    assert {index.keys[j]: X[0, j] for j in range(X.shape[1])} == fv.counts


@given(st.lists(tagged_cascades(max_size=15, n_tags=3), min_size=2, max_size=8), st.randoms(use_true_random=False))
def test_row_order_does_not_change_columns(cs, rnd):
    perm = list(range(len(cs)))
    rnd.shuffle(perm)
    X, ia = embed_dataset(cs, WLConfig(2))
    Y, ib = embed_dataset([cs[i] for i in perm], WLConfig(2))
    assert ia.labels == ib.labels
    assert (X[perm] != Y).nnz == 0


def test_gram_matrix_psd():
    rng = np.random.default_rng(0)
    cs = []
    for _ in range(20):
        n = int(rng.integers(1, 30))
        parents = [-1] + [int(rng.integers(v)) for v in range(1, n)]
        cs.append(Cascade.from_parents(parents, rng.integers(0, 4, n).tolist()))
    X, _ = embed_dataset(cs, WLConfig(2))
    G = gram_matrix(X)
    assert np.allclose(G, G.T)
    assert np.linalg.eigvalsh(G).min() >= -1e-8


def test_frozen_index_drops_unseen_motifs():
    train = [Cascade((-1, 0), (1, 1))]
    X, index = embed_dataset(train, WLConfig(1))
    Y = index.transform([Cascade((-1, 0, 0), (1, 1, 2))])
    assert Y.shape[1] == X.shape[1]
    # tag 2 is unseen, and so is the root's "1|1,2"; the leaf's "1|1" was seen in training
    assert Y.sum() == 3


def test_index_labels_are_canonical():
    c = Cascade((-1, 0, 0, 1), (0, 1, 1, 0))
    _, index = embed_dataset([c], WLConfig(1))
    assert index.describe() == [(0, "0"), (0, "1"), (1, "0|1"), (1, "0|1,1"), (1, "1|0"), (1, "1|0,0")]


def test_index_and_triplet_roundtrip(tmp_path):
    cs = [Cascade((-1, 0, 0), (1, 0, 2)), Cascade((-1, 0, 1), (0, 0, 3))]
    X, index = embed_dataset(cs, WLConfig(2))
    p = tmp_path / "x.txt"
    write_triplets(X, p, {"note": "t"})
    Y, meta = read_triplets(p)
    assert (X != Y).nnz == 0 and meta["note"] == "t" and meta["rows"] == 2
    back = FeatureIndex.from_dict(index.to_dict())
    assert back.keys == index.keys and back.labels == index.labels
    assert (back.transform(cs) != X).nnz == 0
    write_index(index, tmp_path / "idx.tsv")
    lines = (tmp_path / "idx.tsv").read_text().splitlines()
    assert lines[0] == "col\titeration\tlabel" and len(lines) == len(index) + 1


def test_read_triplets_reports_bad_line(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("0 0 1\n0 1\n")
    with pytest.raises(ValueError, match="line 2"):
        read_triplets(p)


def test_empty_batch():
    assert embed_many([], WLConfig(2), Interner()) == []
