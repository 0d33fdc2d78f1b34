"""Half-line classification study on random scalar games.

Draws random 3x3 payoff matrices, compares the scheme's value-at-zero
estimate against the exact LP game value for targets {g <= v* - margin} and
{g <= v* + margin}, and writes one CSV row per (game, side) with the
estimate, the exact value, the error and the verdict.
"""

from __future__ import annotations

import argparse
import csv
import time

import numpy as np

from approachability.games import HalfSpace, VectorGame
from approachability.hjb import SchemeConfig, classify
from approachability.lp import matrix_game_value


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--games", type=int, default=20)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--margin", type=float, default=0.5)
    ap.add_argument("--s0", type=float, default=0.02)
    ap.add_argument("--sgrid", type=int, default=49)
    ap.add_argument("--ggrid", type=int, default=61)
    ap.add_argument("--actions", type=int, default=13)
    ap.add_argument("--tol", type=float, default=0.25)
    ap.add_argument("--out", default="classification_study.csv")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    cfg = SchemeConfig(
        s0=args.s0, steps=args.sgrid, g_nodes=(args.ggrid,), action_resolution=args.actions
    )
    t0 = time.perf_counter()
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["game", "side", "vstar", "c", "exact", "estimate", "error", "verdict"])
        for i in range(args.games):
            m = rng.uniform(-1, 1, (3, 3))
            game = VectorGame(m[:, :, None])
            vstar = matrix_game_value(m).value
            for side, c in (("below", vstar - args.margin), ("above", vstar + args.margin)):
                exact = max(0.0, vstar - c)
                res = classify(game, HalfSpace(np.array([1.0]), c), cfg, tol=args.tol)
                writer.writerow(
                    [i, side, f"{vstar:.6f}", f"{c:.6f}", f"{exact:.6f}",
                     f"{res['estimate']:.6f}", f"{abs(res['estimate'] - exact):.6f}",
                     res["verdict"]]
                )
                print(f"game {i:2d} {side:5s}: exact {exact:.3f} est {res['estimate']:.3f} -> {res['verdict']}")
    print(f"wrote {args.out} in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
