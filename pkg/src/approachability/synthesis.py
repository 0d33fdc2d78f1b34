"""Strategy synthesis from a solved value grid.

Two layers: a piecewise-constant feedback strategy for the averaged
continuous game (actions frozen on a 1/N mesh, each chosen from the value
grid's feedback map with a one-interval information delay), and its
transcription into a repeated-game strategy.  The transcription replays the
continuous strategy exactly on block horizons, so the realised average after
k*N stages coincides with the continuous endpoint to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .games import GameError, MixedAction, payoff
from .hjb import ValueGrid, feedback_action


class SynthesisError(GameError):
    """Invalid mesh or horizon for strategy construction."""


@dataclass(frozen=True)
class PiecewiseConstantControl:
    """Right-continuous step control: ``actions[i]`` on [times[i], times[i+1])."""

    times: np.ndarray  # (M + 1,) increasing breakpoints
    actions: np.ndarray  # (M, n) mixed-action weights

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        a = np.atleast_2d(np.asarray(self.actions, dtype=float))
        if t.size != a.shape[0] + 1:
            raise SynthesisError("need one more breakpoint than actions")
        if np.any(np.diff(t) <= 0):
            raise SynthesisError("breakpoints must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "actions", a)

    def at(self, t: float) -> np.ndarray:
        if not self.times[0] <= t <= self.times[-1]:
            raise SynthesisError(f"time {t} outside the control's span")
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.actions[min(i, self.actions.shape[0] - 1)]

    @staticmethod
    def from_stages(actions: np.ndarray, horizon: float = 1.0) -> "PiecewiseConstantControl":
        """Uniform mesh on [0, horizon] with one step per stage action."""
        a = np.atleast_2d(np.asarray(actions, dtype=float))
        return PiecewiseConstantControl(np.linspace(0.0, horizon, a.shape[0] + 1), a)


@dataclass(frozen=True)
class NADCStrategy:
    """Delayed piecewise-constant feedback strategy on the 1/N mesh.

    On [0, mstar/N) it plays the fixed opener ``x0``; from each later mesh
    point j/N it plays the grid feedback evaluated at the running average
    g(j/N), held constant over the interval.  The action on an interval
    depends on the opponent's control strictly before it, so the map is
    non-anticipating with delay 1/N.
    """

    vg: ValueGrid
    N: int
    g0: np.ndarray
    x0: MixedAction

    @property
    def mstar(self) -> int:
        return int(math.ceil(self.vg.cfg.s0 * self.N - 1e-12))

    def respond(self, y_control: PiecewiseConstantControl) -> tuple[PiecewiseConstantControl, np.ndarray]:
        """Replay against an opponent control on [0, 1].

        Returns the induced own control on the 1/N mesh and the terminal
        average g(1) of the bilinear payoff along the pair.
        """
        if abs(y_control.times[0]) > 1e-12 or abs(y_control.times[-1] - 1.0) > 1e-12:
            raise SynthesisError("opponent control must span [0, 1]")
        game = self.vg.game
        mesh = np.linspace(0.0, 1.0, self.N + 1)
        cuts = np.unique(np.concatenate([mesh, y_control.times]))
        integral = np.zeros(game.d)
        own = np.empty((self.N, game.a))
        for j in range(self.N):
            t_j = mesh[j]
            if j < self.mstar:
                x = self.x0
            else:
                x = feedback_action(self.vg, t_j, integral / t_j, player=1)
            own[j] = x.weights
            lo, hi = t_j, mesh[j + 1]
            for a, b in zip(cuts, cuts[1:]):
                if a >= hi - 1e-15 or b <= lo + 1e-15:
                    continue
                seg_lo, seg_hi = max(a, lo), min(b, hi)
                y = MixedAction(y_control.at(0.5 * (seg_lo + seg_hi)))
                integral += (seg_hi - seg_lo) * payoff(game, x, y)
        return PiecewiseConstantControl(mesh, own), integral


def build_nadc(vg: ValueGrid, N: int, g0: np.ndarray | None = None) -> NADCStrategy:
    """Fix the mesh and the opener; the opener is the feedback at (s0, g0)."""
    if N < 1:
        raise SynthesisError("need at least one mesh interval")
    if 1.0 / N < vg.ds - 1e-12:
        raise SynthesisError("mesh interval 1/N must be at least the scheme's time step")
    if g0 is None:
        g0 = 0.5 * (vg.lo + vg.hi)
    g0 = np.atleast_1d(np.asarray(g0, dtype=float))
    if not vg.contains(g0):
        raise SynthesisError(f"initial state {g0} outside the grid box")
    x0 = feedback_action(vg, vg.cfg.s0, g0, player=1)
    return NADCStrategy(vg=vg, N=N, g0=g0, x0=x0)


class RepeatedStrategy:
    """Stage-by-stage transcription of an NADC strategy for horizon n.

    With k = n // N, the first k*mstar stages play the opener, stages up to
    k*N replay the continuous feedback on the refined mesh 1/(k*N), and the
    r = n - k*N leftover stages play the opener again.  When n < N there is
    no room to replay and every stage plays the opener; ``degenerate`` flags
    that case.  Call ``act`` once per stage with the opponent's past mixed
    actions; bookkeeping is incremental, so a full run costs O(n).
    """

    def __init__(self, base: NADCStrategy, n: int):
        if n < 1:
            raise SynthesisError("horizon must be positive")
        self.base = base
        self.n = n
        self.k = n // base.N
        self.r = n - self.k * base.N
        self.degenerate = self.k == 0
        game = base.vg.game
        self._own: list[np.ndarray] = []
        self._cum = np.zeros((n + 1, game.d))  # prefix sums of stage payoffs
        self._processed = 0
        self._interval_action: dict[int, np.ndarray] = {}

    @property
    def game(self):
        return self.base.vg.game

    def record(self, opponent_history: list) -> None:
        """Fold opponent actions into the running payoff sums, up to own play."""
        upto = min(len(opponent_history), len(self._own))
        while self._processed < upto:
            i = self._processed
            x = MixedAction(self._own[i])
            y = opponent_history[i]
            if not isinstance(y, MixedAction):
                y = MixedAction(np.asarray(y, dtype=float))
            self._cum[i + 1] = self._cum[i] + payoff(self.game, x, y)
            self._processed = i + 1

    def act(self, opponent_history: list) -> MixedAction:
        m = len(opponent_history) + 1
        if m > self.n:
            raise SynthesisError("horizon exhausted")
        if m <= len(self._own):
            return MixedAction(self._own[m - 1])
        if m != len(self._own) + 1:
            raise SynthesisError("stages must be played in order")
        self.record(opponent_history)
        x_m = self._stage_action(m)
        self._own.append(x_m.weights)
        return x_m

    def _stage_action(self, m: int) -> MixedAction:
        base = self.base
        if self.degenerate or m <= self.k * base.mstar or m > self.k * base.N:
            return base.x0
        j = (m - 1) // self.k  # mesh interval of stage m on the refined clock
        if j < base.mstar:
            return base.x0
        cached = self._interval_action.get(j)
        if cached is not None:
            return MixedAction(cached)
        s = j / base.N
        g = self._cum[j * self.k] / (self.k * base.N) / s
        x = feedback_action(base.vg, s, g, player=1)
        self._interval_action[j] = x.weights
        return x

    def average_after(self, m: int) -> np.ndarray:
        """Realised average payoff over the first m processed stages."""
        if m > self._processed:
            raise SynthesisError(f"only {self._processed} stages processed")
        return self._cum[m] / m


def replay_gap_bound(strategy: RepeatedStrategy) -> float:
    """Worst-case gap between the horizon-n average and the block endpoint."""
    return 2.0 * strategy.game.kappa * strategy.base.N / strategy.n
