"""End-to-end acceptance checks. Each test records one PASS/FAIL line in the terminal summary."""
import gc
import math
import time
from collections import Counter

import numpy as np
import pytest

from cascadewl.attributes import THRESHOLD_BASELINES
from cascadewl.cascades import Cascade, sanitize
from cascadewl.evaluation import (
    ExperimentConfig, SplitPlan, derive_seed, prepare, recompute_f1, rumor_folds, run_experiment, split_indices,
    sweep_truncation, sweep_wl_iterations,
)
from cascadewl.models import gbt_train, logistic_loss_grad, logreg_train, predict
from cascadewl.models.linear import training_loss
from cascadewl.synth import BranchingParams, GeneratorConfig, generate, generate_planted_motif, generate_stat_matched_pair
from cascadewl.tagging import TagScheme, apply_tags
from cascadewl.wl import Interner, WLConfig, embed_dataset, embed_many, gram_matrix

from oracles import central_difference, decode, naive_wl_counts, plain_logistic_loss

pytestmark = pytest.mark.acceptance


def record(lines, number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    lines.append(line)
    print(line)
    assert ok, line


def random_tree(rng, n, n_tags):
    parents = [-1] + [int(rng.integers(v)) for v in range(1, n)]
    return Cascade.from_parents(parents, rng.integers(0, n_tags, n).tolist())


def test_c1_wl_matches_naive_strings(acceptance_lines):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(1000):
        c = random_tree(rng, int(rng.integers(1, 51)), int(rng.integers(1, 6)))
        h = int(rng.integers(0, 5))
        fv = embed_many([c], WLConfig(h), Interner())[0]
        memo = {}
        got = Counter({(i, decode(fv.interner, i, t, memo)): v for (i, t), v in fv.counts.items()})
        bad += got != naive_wl_counts(list(c.parents), list(c.tags), h)
    dt = time.perf_counter() - t0
    record(acceptance_lines, 1, bad == 0 and dt < 60, f"1000 trees, {bad} mismatches, {dt:.1f}s")


def test_c2_gram_psd(acceptance_lines):
    worst = math.inf
    for seed in range(50):
        rng = np.random.default_rng(seed)
        cs = [random_tree(rng, int(rng.integers(1, 40)), 4) for _ in range(20)]
        X, _ = embed_dataset(cs, WLConfig(2))
        worst = min(worst, float(np.linalg.eigvalsh(gram_matrix(X)).min()))
    record(acceptance_lines, 2, worst >= -1e-8, f"min eigenvalue over 50 seeds {worst:.3e}")


def test_c3_isomorphism_invariance(acceptance_lines):
    rng = np.random.default_rng(303)
    interner = Interner()
    diff = mass_bad = 0
    for _ in range(500):
        c = random_tree(rng, int(rng.integers(1, 50)), 5)
        h = int(rng.integers(0, 5))
        perm = rng.permutation(c.n)
        parents, tags = [-1] * c.n, [0] * c.n
        for v in range(c.n):
            parents[perm[v]] = -1 if c.parents[v] < 0 else int(perm[c.parents[v]])
            tags[perm[v]] = c.tags[v]
        a, b = embed_many([c, Cascade.from_parents(parents, tags)], WLConfig(h), interner)
        diff += a.counts != b.counts
        mass_bad += any(x.iteration_mass(i) != c.n for x in (a, b) for i in range(h + 1))
    record(acceptance_lines, 3, diff == 0 and mass_bad == 0,
           f"500 permuted pairs, {diff} differing embeddings, {mass_bad} mass errors")


def _tree_with_edges(m):
    # supercritical branching so the size target is always reachable
    p = BranchingParams(offspring_weights=((0,) * 9 + (1.0,), (0.3, 0.2, 0.2, 0.15, 0.15)))
    cfg = GeneratorConfig(seed=m, n_cascades=1, size_range=(m + 1, m + 1), class0_params=p, class1_params=p,
                          stat_matched=False)
    return apply_tags(generate(cfg)[0], TagScheme("graph"))


def test_c4_runtime_linear_in_edges(acceptance_lines):
    sizes = (1000, 2000, 4000, 8000)
    cs = {m: _tree_with_edges(m) for m in sizes}
    assert all(cs[m].n - 1 == m for m in sizes)
    cfg = WLConfig(2)
    best = dict.fromkeys(sizes, math.inf)
    # min of interleaved repeats on process time filters scheduler noise
    gc.disable()
    try:
        for _ in range(15):
            for m in sizes:
                t0 = time.process_time_ns()
                embed_many([cs[m]], cfg, Interner())
                best[m] = min(best[m], time.process_time_ns() - t0)
    finally:
        gc.enable()
    ratios = [best[b] / best[a] for a, b in zip(sizes, sizes[1:])]
    ms = ", ".join(f"{best[m] / 1e6:.2f}" for m in sizes)
    record(acceptance_lines, 4, all(r <= 2.0 for r in ratios),
           f"h=2 times [{ms}] ms, doubling ratios {[round(r, 3) for r in ratios]}")


def test_c5_gradient_and_convexity(acceptance_lines):
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n, d = int(rng.integers(5, 30)), int(rng.integers(1, 8))
        X = rng.normal(size=(n, d))
        y = (rng.random(n) < 0.4).astype(float)
        sw = rng.uniform(0.2, 3.0, n)
        l2 = float(rng.uniform(0, 0.5))
        w, b = rng.normal(size=d), float(rng.normal())
        _, gw, gb = logistic_loss_grad(w, b, X, y, sw, l2)
        num = central_difference(lambda t: plain_logistic_loss(t[:-1], t[-1], X, y, sw, l2), np.append(w, b))
        worst = max(worst, np.linalg.norm(np.append(gw, gb) - num) / max(np.linalg.norm(num), 1e-12))
    rng = np.random.default_rng(7)
    X = rng.normal(size=(60, 5))
    y = (X[:, 0] - X[:, 1] + rng.normal(size=60) > 0).astype(int)
    losses = [training_loss(logreg_train(X, y, l2_lambda=0.05, init_scale=1.0, seed=s), X, y) for s in range(5)]
    spread = max(losses) - min(losses)
    record(acceptance_lines, 5, worst < 1e-5 and spread < 1e-6,
           f"max relative gradient error {worst:.2e}, restart loss spread {spread:.2e}")


def test_c6_xor_needs_nonlinearity(acceptance_lines):
    rng = np.random.default_rng(0)
    X = rng.integers(0, 2, size=(400, 2)).astype(float)
    y = (X[:, 0] != X[:, 1]).astype(int)
    gbt = np.mean(predict(gbt_train(X, y, n_trees=30, max_leaves=4, min_samples_leaf=5), X)[0] == y)
    lin = np.mean(predict(logreg_train(X, y), X)[0] == y)
    record(acceptance_lines, 6, gbt >= 0.95 and lin <= 0.6, f"GBT accuracy {gbt:.3f}, logistic accuracy {lin:.3f}")


def test_c7_baselines_fail_wl_succeeds(acceptance_lines):
    t0 = time.perf_counter()
    ds = generate_stat_matched_pair(GeneratorConfig(seed=1, n_cascades=400, size_range=(25, 60)))
    base = dict(min_cascade_size=25, tags="graph", wl_h=2, n_trials=20, seed=0)
    scores = {}
    for model in ["noinfo", "wl-nonlin", "features-lin", "features-nonlin"] + [
        f"attribute:{a}" for a in THRESHOLD_BASELINES
    ]:
        scores[model] = run_experiment(ds, ExperimentConfig(model=model, **base)).mean_f1
    dt = time.perf_counter() - t0
    ref = scores["noinfo"]
    off = {m: round(s - ref, 4) for m, s in scores.items() if m not in ("noinfo", "wl-nonlin") and abs(s - ref) > 0.05}
    ok = not off and scores["wl-nonlin"] >= 0.9 and dt < 300
    worst = max(abs(s - ref) for m, s in scores.items() if m not in ("noinfo", "wl-nonlin"))
    record(acceptance_lines, 7, ok,
           f"noinfo {ref:.3f}, WL-nonlin {scores['wl-nonlin']:.3f}, max baseline gap {worst:.3f}"
           f"{', outside: ' + str(off) if off else ''}, {dt:.0f}s")


def test_c8_iteration_sweep_shape(acceptance_lines):
    ds = generate_planted_motif(GeneratorConfig(seed=2, n_cascades=200, size_range=(25, 60)))
    base = dict(min_cascade_size=1, tags="graph", seed=0)
    nonlin = sweep_wl_iterations(ds, ExperimentConfig(model="wl-nonlin", n_trials=3, **base), [0, 2]).mean_f1
    lin = sweep_wl_iterations(ds, ExperimentConfig(model="wl-lin", n_trials=5, **base), range(5)).mean_f1
    gain, spread = nonlin[1] - nonlin[0], max(lin) - min(lin)
    record(acceptance_lines, 8, gain >= 0.1 and spread < 0.05,
           f"nonlinear h0 {nonlin[0]:.3f} -> h2 {nonlin[1]:.3f}; linear over h=0..4 "
           f"{[round(v, 3) for v in lin]} (range {spread:.3f})")


def test_c9_truncation_consistency(acceptance_lines):
    ds = generate_stat_matched_pair(GeneratorConfig(seed=3, n_cascades=100, size_range=(25, 60)))
    cfg = ExperimentConfig(min_cascade_size=25, model="wl-lin", wl_h=2, n_trials=5, seed=0)
    full = run_experiment(ds, cfg).f1_scores
    max_depth = max(max(sanitize(c).depths()) for c in ds)
    by_time = sweep_truncation(ds, cfg, times=[0.25, 1, 3, 6, 12, 24, math.inf])
    by_depth = sweep_truncation(ds, cfg, depths=list(range(0, max_depth + 1)))
    same = by_time.reports[-1].f1_scores == full and by_depth.reports[-1].f1_scores == full
    ft = [r.retained_fraction for r in by_time.reports]
    fd = [r.retained_fraction for r in by_depth.reports]
    mono = all(a <= b for a, b in zip(ft, ft[1:])) and all(a <= b for a, b in zip(fd, fd[1:]))
    record(acceptance_lines, 9, same and mono and ft[-1] == fd[-1] == 1.0,
           f"identity at inf/max depth {same}; retained by time {[round(f, 3) for f in ft]}, "
           f"by depth {[round(f, 3) for f in fd]}")


def test_c10_protocol_integrity(acceptance_lines):
    ds = generate_stat_matched_pair(GeneratorConfig(seed=4, n_cascades=100, size_range=(25, 40)))
    cfg = ExperimentConfig(min_cascade_size=25, model="attribute:size", n_trials=100, seed=12)
    report = run_experiment(ds, cfg)
    prep = prepare(ds, cfg)
    leaks = 0
    for t in report.trials:
        tr, te = split_indices(prep.rumor_ids, SplitPlan(derive_seed(cfg.seed, t.trial), cfg.test_fraction))
        train_r = {prep.rumor_ids[i] for i in tr}
        leaks += len(train_r & {prep.rumor_ids[i] for i in te})
        # cross-validation folds inside the training side are rumor-disjoint too
        inner_ids = [prep.rumor_ids[i] for i in tr]
        for val in rumor_folds(inner_ids, cfg.folds, t.seed):
            rest = np.setdiff1d(np.arange(tr.size), val)
            leaks += len({inner_ids[i] for i in val} & {inner_ids[i] for i in rest})
    mismatched = sum(recompute_f1(t) != t.f1 for t in report.trials)
    again = run_experiment(ds, cfg).to_json() == report.to_json()
    wl_cfg = ExperimentConfig(min_cascade_size=25, model="wl-lin", n_trials=5, seed=12)
    again_wl = run_experiment(ds, wl_cfg).to_json() == run_experiment(ds, wl_cfg).to_json()
    ok = leaks == 0 and mismatched == 0 and again and again_wl
    record(acceptance_lines, 10, ok,
           f"100 splits, {leaks} leaked rumors, {mismatched} F1 mismatches, byte-identical reports {again and again_wl}")
