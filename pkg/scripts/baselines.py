"""Every model family on the stat-matched pair: WL vs attribute baselines vs no-info.

    python scripts/baselines.py --trials 20
"""
from __future__ import annotations

import json
import time

from _common import parser, stat_matched
from cascadewl.attributes import THRESHOLD_BASELINES
from cascadewl.evaluation import ExperimentConfig, run_experiment

MODELS = ["noinfo", "wl-nonlin", "wl-lin", "features-lin", "features-nonlin"] + [
    f"attribute:{a}" for a in THRESHOLD_BASELINES
]


def main():
    p = parser(__doc__.splitlines()[0], trials=20)
    p.add_argument("--tags", default="graph", choices=("cascade", "graph", "constant"))
    args = p.parse_args()
    ds = stat_matched()
    rows = {}
    for model in MODELS:
        t0 = time.perf_counter()
        cfg = ExperimentConfig(min_cascade_size=25, tags=args.tags, model=model, wl_h=2,
                               n_trials=args.trials, seed=args.seed)
        rep = run_experiment(ds, cfg)
        rows[model] = rep.to_dict()
        print(f"{model:<28} F1 {rep.mean_f1:.4f} +- {rep.std_f1:.4f}   ({time.perf_counter() - t0:.1f}s)", flush=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, sort_keys=True, indent=2)


if __name__ == "__main__":
    main()
