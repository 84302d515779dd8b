#!/usr/bin/env python3
"""Run the link-prediction experiment on an edge-list file and print the
per-seed table. Library-API twin of `motifembed linkpred`."""

import argparse

from motifembed.evaluation import DEFAULT_STEP_GRID, EvalConfig, run_experiment
from motifembed.graph import load_edge_list
from motifembed.matrices import MotifMatrixKind
from motifembed.pipeline import PipelineConfig


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("input", help="edge-list file (lines of 'u v')")
    ap.add_argument("--kind", default="w", choices=[k.value for k in MotifMatrixKind])
    ap.add_argument("--dl", type=int, default=16, help="local block rank")
    ap.add_argument("--d", type=int, default=128, help="global embedding rank")
    ap.add_argument("--k", type=int, default=None,
                    help="fixed step count; omit to select from 1..4 per seed")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0, help="base seed")
    args = ap.parse_args()

    g = load_edge_list(args.input)
    grid = DEFAULT_STEP_GRID if args.k is None else (args.k,)
    cfg = EvalConfig(
        pipeline=PipelineConfig(
            max_steps=max(grid),
            local_rank=args.dl,
            global_rank=args.d,
            kind=MotifMatrixKind(args.kind),
        ),
        step_grid=grid,
        n_seeds=args.seeds,
        base_seed=args.seed,
    )
    report = run_experiment(g, cfg)
    print(f"{'seed':>6} {'k':>3} {'lambda':>8} {'auc':>8}")
    for o in report.outcomes:
        print(f"{o.seed:>6} {o.chosen_steps:>3} {o.chosen_lambda:>8g} {o.auc:>8.4f}")
    print(f"  mean {report.mean_auc:.4f}  std {report.std_auc:.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
