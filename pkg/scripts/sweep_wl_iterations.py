"""Mean F1 against WL iterations h on the planted-motif set, linear and nonlinear.

    python scripts/sweep_wl_iterations.py --trials 5
"""
from __future__ import annotations

import json

from _common import parser, planted_motif
from cascadewl.evaluation import ExperimentConfig, sweep_wl_iterations


def main():
    p = parser(__doc__.splitlines()[0], trials=5)
    p.add_argument("--max-h", type=int, default=4)
    args = p.parse_args()
    ds = planted_motif()
    out = {}
    for model in ("wl-nonlin", "wl-lin"):
        cfg = ExperimentConfig(min_cascade_size=1, model=model, n_trials=args.trials, seed=args.seed)
        rep = sweep_wl_iterations(ds, cfg, range(args.max_h + 1))
        print(model)
        print(rep.to_table())
        out[model] = rep.to_dict()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(out, fh, sort_keys=True, indent=2)


if __name__ == "__main__":
    main()
