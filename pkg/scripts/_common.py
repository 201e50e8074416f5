"""Shared dataset builders for the experiment scripts."""
from __future__ import annotations

import argparse

from cascadewl.synth import GeneratorConfig, generate_planted_motif, generate_stat_matched_pair


def stat_matched(seed: int = 1, n: int = 400, size_range=(25, 60)):
    return generate_stat_matched_pair(GeneratorConfig(seed=seed, n_cascades=n, size_range=tuple(size_range)))


def planted_motif(seed: int = 2, n: int = 200, size_range=(25, 60)):
    return generate_planted_motif(GeneratorConfig(seed=seed, n_cascades=n, size_range=tuple(size_range)))


def parser(description: str, trials: int) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--seed", type=int, default=0, help="master evaluation seed")
    p.add_argument("--out", help="write the JSON report here")
    return p
