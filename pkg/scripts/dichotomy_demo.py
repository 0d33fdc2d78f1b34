"""Approach/exclude dichotomy under a best-response adversary.

Uses the 2x2 equalizer game [[3,1],[0,2]] (value 1.5) with half-line targets
{g <= 2} (approachable) and {g <= 1} (excludable).  Synthesises the delayed
feedback strategy from the minmax grid, drives it against the maxmin
best-response adversary, and writes both trajectories as CSV.
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import replace

import numpy as np

from approachability.games import HalfSpace, VectorGame
from approachability.hjb import SchemeConfig, solve_value
from approachability.simulate import BestResponseAdversary, run
from approachability.synthesis import RepeatedStrategy, build_nadc

EQUALIZER = VectorGame(np.array([[[3.0], [1.0]], [[0.0], [2.0]]]))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--N", type=int, default=20)
    ap.add_argument("--out-prefix", default="dichotomy")
    args = ap.parse_args()

    cfg = SchemeConfig(s0=0.05, steps=19, g_nodes=(31,), action_resolution=9)
    for label, c in (("approachable", 2.0), ("excludable", 1.0)):
        target = HalfSpace(np.array([1.0]), c)
        vg = solve_value(EQUALIZER, target, cfg)
        vg2 = solve_value(EQUALIZER, target, replace(cfg, order="maxmin"))
        strat = RepeatedStrategy(build_nadc(vg, args.N), args.n)
        traj = run(strat, BestResponseAdversary(vg2, args.n), EQUALIZER, target, args.n)
        path = f"{args.out_prefix}_{label}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["m", "gbar", "distance"])
            for m in range(args.n):
                writer.writerow([m + 1, f"{traj.averages[m][0]:.8f}", f"{traj.distances[m]:.8f}"])
        print(f"{label}: final distance {traj.distances[-1]:.4f} (target g <= {c}) -> {path}")


if __name__ == "__main__":
    main()
