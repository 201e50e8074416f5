"""F1 as the minimum cascade size filter rises (fewer, larger cascades).

    python scripts/sweep_min_size.py --trials 5
"""
from __future__ import annotations

import json

from _common import parser, stat_matched
from cascadewl.evaluation import ExperimentConfig, sweep_min_size


def main():
    p = parser(__doc__.splitlines()[0], trials=5)
    p.add_argument("--model", default="wl-nonlin")
    args = p.parse_args()
    ds = stat_matched(n=300, size_range=(25, 200))
    cfg = ExperimentConfig(model=args.model, n_trials=args.trials, seed=args.seed)
    rep = sweep_min_size(ds, cfg, [25, 50, 75, 100, 125, 150])
    print(rep.to_table())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rep.to_json())


if __name__ == "__main__":
    main()
