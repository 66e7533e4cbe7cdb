#!/usr/bin/env python3
"""Tightening runs on the optimization protocol (M=16, L_K=8, d=2, variance 1/(L_K M)).

For every seed, runs LS, LG and LGhat with both step rules and FIR-tightening,
writes one trajectory CSV per run and a summary of the final condition numbers.
"""

import argparse
from pathlib import Path

import numpy as np

from framealias import Filterbank
from framealias.cli import TRAJECTORY_COLUMNS, write_csv
from framealias.tighten import OptimizerConfig, fir_tighten, sgd_tighten


def init(seed, M, LK, d):
    rng = np.random.default_rng(seed)
    return Filterbank.create(rng.standard_normal((M, LK)) / np.sqrt(LK * M), d)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--iters", type=int, default=250)
    ap.add_argument("--lr", type=float, default=1e-3)
    ap.add_argument("--outdir", default="results/trajectories")
    args = ap.parse_args()

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for seed in range(args.seeds):
        fb = init(seed, 16, 8, 2)
        for objective in ("LS", "LG", "LGhat"):
            for rule in ("scaled", "polyak"):
                cfg = OptimizerConfig(objective, args.lr, args.iters, seed=seed, step_rule=rule)
                _, traj = sgd_tighten(fb, cfg)
                write_csv(out / f"{objective}_{rule}_seed{seed}.csv", TRAJECTORY_COLUMNS, traj.to_rows())
                summary.append((seed, objective, rule, traj.condition[-1], traj.recon_error[-1]))
        _, traj = fir_tighten(fb, max_steps=20, target_condition=1.01, seed=seed)
        write_csv(out / f"fir_seed{seed}.csv", TRAJECTORY_COLUMNS, traj.to_rows())
        summary.append((seed, "fir", traj.status, traj.condition[-1], traj.recon_error[-1]))
    write_csv(out / "summary.csv", ("seed", "method", "rule", "final_condition", "final_recon"), summary)

    for method in ("LS", "LG", "LGhat", "fir"):
        for rule in sorted({r[2] for r in summary if r[1] == method}):
            c = np.array([r[3] for r in summary if r[1] == method and r[2] == rule])
            print(f"{method:6s} {rule:9s} median B/A-1 = {np.median(c) - 1:.2e}  "
                  f"worst = {c.max() - 1:.2e}")


if __name__ == "__main__":
    main()
