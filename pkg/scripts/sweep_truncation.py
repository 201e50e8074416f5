"""Early detection: F1 and retained-node fraction under time and depth truncation.

    python scripts/sweep_truncation.py --trials 5
"""
from __future__ import annotations

import json
import math

from _common import parser, stat_matched
from cascadewl.evaluation import ExperimentConfig, sweep_truncation


def main():
    p = parser(__doc__.splitlines()[0], trials=5)
    p.add_argument("--model", default="wl-nonlin")
    args = p.parse_args()
    ds = stat_matched(n=200)
    cfg = ExperimentConfig(min_cascade_size=25, model=args.model, n_trials=args.trials, seed=args.seed)
    by_time = sweep_truncation(ds, cfg, times=[1, 3, 6, 12, 24, 48, math.inf])
    by_depth = sweep_truncation(ds, cfg, depths=[1, 2, 3, 4, 6, 8])
    print(by_time.to_table())
    print(by_depth.to_table())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"hours": by_time.to_dict(), "depth": by_depth.to_dict()}, fh, sort_keys=True, indent=2)


if __name__ == "__main__":
    main()
