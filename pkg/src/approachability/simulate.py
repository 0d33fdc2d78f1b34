"""Repeated-game simulation harness.

Runs a stage strategy against an adversary, tracks the running average with
the exact incremental recursion, and records the distance to a target after
every stage.  Adversaries implement ``act(m, own_history, gbar)`` where
``own_history`` lists the strategy's past mixed actions and ``gbar`` is the
running average before stage m (None at the first stage).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .games import MixedAction, TargetSet, VectorGame, payoff
from .hjb import ValueGrid, feedback_action


@dataclass(frozen=True)
class Trajectory:
    """Per-stage record of one repeated-game run."""

    xs: np.ndarray  # (n, a) strategy actions
    ys: np.ndarray  # (n, b) adversary actions
    stage_payoffs: np.ndarray  # (n, d)
    averages: np.ndarray  # (n, d) running averages
    distances: np.ndarray  # (n,)

    def __len__(self) -> int:
        return self.xs.shape[0]


class StationaryAdversary:
    """Plays one mixed action forever."""

    def __init__(self, action: MixedAction):
        self.action = action

    def act(self, m, own_history, gbar):
        return self.action


class SequenceAdversary:
    """Replays a fixed list of mixed actions, cycling when exhausted."""

    def __init__(self, actions: list):
        if not actions:
            raise ValueError("need at least one action")
        self.actions = list(actions)

    def act(self, m, own_history, gbar):
        return self.actions[(m - 1) % len(self.actions)]


class RandomAdversary:
    """Uniform random pure action each stage, from a seeded generator."""

    def __init__(self, b: int, seed: int):
        self.b = b
        self.rng = np.random.default_rng(seed)

    def act(self, m, own_history, gbar):
        return MixedAction.pure(self.b, int(self.rng.integers(self.b)))


class BestResponseAdversary:
    """Greedy maximiser driven by a value grid solved in the maxmin order.

    Stage m is mapped to the scheme clock as (m - 1) / n, clipped into the
    grid's time span; the state fed back is the current running average
    (the box centroid before any payoff exists).
    """

    def __init__(self, vg: ValueGrid, n: int):
        self.vg = vg
        self.n = n

    def act(self, m, own_history, gbar):
        vg = self.vg
        s = min(max((m - 1) / self.n, vg.cfg.s0), vg.s_values[-1] - vg.ds)
        g = 0.5 * (vg.lo + vg.hi) if gbar is None else np.clip(gbar, vg.lo, vg.hi)
        return feedback_action(vg, s, g, player=2)


def run(strategy, adversary, game: VectorGame, target: TargetSet, n: int) -> Trajectory:
    """Play n stages; the average follows gbar += (g - gbar) / m exactly."""
    xs = np.empty((n, game.a))
    ys = np.empty((n, game.b))
    gs = np.empty((n, game.d))
    gbars = np.empty((n, game.d))
    dists = np.empty(n)
    own: list[MixedAction] = []
    opp: list[MixedAction] = []
    gbar = None
    for m in range(1, n + 1):
        y = adversary.act(m, own, gbar)
        x = strategy.act(opp)
        g = payoff(game, x, y)
        gbar = g.copy() if gbar is None else gbar + (g - gbar) / m
        own.append(x)
        opp.append(y)
        xs[m - 1] = x.weights
        ys[m - 1] = y.weights
        gs[m - 1] = g
        gbars[m - 1] = gbar
        dists[m - 1] = target.distance(gbar)
    return Trajectory(xs=xs, ys=ys, stage_payoffs=gs, averages=gbars, distances=dists)


def convergence_scan(make_strategy, adversaries: dict, game, target, horizons) -> list[dict]:
    """Final distance per horizon, reporting the worst adversary for each."""
    rows = []
    for n in horizons:
        worst, worst_name = -np.inf, None
        for name, make_adversary in adversaries.items():
            traj = run(make_strategy(n), make_adversary(n), game, target, n)
            final = float(traj.distances[-1])
            if final > worst:
                worst, worst_name = final, name
        rows.append({"n": n, "max_final_distance": worst, "argmax_adversary": worst_name})
    return rows


def trajectory_to_csv(traj: Trajectory, path: str, header_lines: list[str] | None = None) -> None:
    a, b, d = traj.xs.shape[1], traj.ys.shape[1], traj.averages.shape[1]
    with open(path, "w", newline="") as fh:
        for line in header_lines or []:
            fh.write(line.rstrip("\n") + "\n")
        writer = csv.writer(fh)
        writer.writerow(
            ["m"]
            + [f"x{i + 1}" for i in range(a)]
            + [f"y{j + 1}" for j in range(b)]
            + [f"g{t + 1}" for t in range(d)]
            + [f"gbar{t + 1}" for t in range(d)]
            + ["distance"]
        )
        for m in range(len(traj)):
            writer.writerow(
                [m + 1, *traj.xs[m], *traj.ys[m], *traj.stage_payoffs[m], *traj.averages[m], traj.distances[m]]
            )


def scan_to_csv(rows: list[dict], path: str, header_lines: list[str] | None = None) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_lines or []:
            fh.write(line.rstrip("\n") + "\n")
        writer = csv.writer(fh)
        writer.writerow(["n", "max_final_distance", "argmax_adversary"])
        for row in rows:
            writer.writerow([row["n"], row["max_final_distance"], row["argmax_adversary"]])
