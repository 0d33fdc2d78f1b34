"""Semi-Lagrangian backward solver for the averaging game's value.

The state is the running average payoff g; over one backward step the scheme
replaces g by the convex combination (1 - ds/s) g + (ds/s) xAy and reads the
next time slice through multilinear interpolation.  Actions range over
simplex grids (vertices always included), so the inner optimisation is a
finite minimax and the update never leaves the grid box.  The step constraint
ds <= s0 is what guarantees the convex-combination form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .games import MixedAction, TargetSet, VectorGame
from .grids import simplex_grid
from .lp import matrix_game_value

MINMAX = "minmax"
MAXMIN = "maxmin"


class SchemeError(ValueError):
    """Invalid solver configuration."""


@dataclass(frozen=True)
class SchemeConfig:
    """Discretisation parameters for the backward sweep.

    ``g_nodes`` is the per-dimension node count; ``box`` (lo, hi arrays)
    must contain the convex hull of the pure payoffs and defaults to its
    bounding box.  ``order`` selects which player optimises on the outside.
    """

    s0: float
    steps: int
    g_nodes: tuple[int, ...]
    action_resolution: int
    order: str = MINMAX
    box: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self):
        if not 0.0 < self.s0 < 1.0:
            raise SchemeError("s0 must lie in (0, 1)")
        if self.steps < 1:
            raise SchemeError("need at least one time step")
        if self.ds > self.s0 + 1e-12:
            raise SchemeError(
                f"time step {self.ds} exceeds s0={self.s0}; the state update "
                "would leave the grid box"
            )
        if any(n < 2 for n in self.g_nodes):
            raise SchemeError("need at least two nodes per state dimension")
        if self.order not in (MINMAX, MAXMIN):
            raise SchemeError(f"unknown order {self.order!r}")

    @property
    def ds(self) -> float:
        return (1.0 - self.s0) / self.steps


@dataclass(frozen=True)
class ValueGrid:
    """Value samples on the time x state grid, plus everything needed to act."""

    game: VectorGame
    cfg: SchemeConfig
    s_values: np.ndarray  # (steps + 1,), s0 .. 1
    lo: np.ndarray
    hi: np.ndarray
    values: np.ndarray  # (steps + 1, *g_nodes)
    x_grid: np.ndarray  # (nx, a) lexicographic
    y_grid: np.ndarray  # (ny, b) lexicographic
    pay: np.ndarray  # (nx * ny, d) pure pair payoffs

    @property
    def ds(self) -> float:
        return self.cfg.ds

    @property
    def dg(self) -> np.ndarray:
        return (self.hi - self.lo) / (np.array(self.cfg.g_nodes) - 1)

    def node_points(self) -> np.ndarray:
        axes = [np.linspace(self.lo[i], self.hi[i], n) for i, n in enumerate(self.cfg.g_nodes)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def slice_at(self, s: float) -> np.ndarray:
        """Linear-in-time interpolation between stored slices (flattened)."""
        s = min(max(s, self.s_values[0]), self.s_values[-1])
        t = (s - self.s_values[0]) / self.ds
        k = min(int(np.floor(t)), self.cfg.steps - 1)
        f = t - k
        flat = self.values.reshape(self.cfg.steps + 1, -1)
        return (1.0 - f) * flat[k] + f * flat[k + 1]

    def contains(self, g: np.ndarray) -> bool:
        g = np.atleast_1d(np.asarray(g, dtype=float))
        return bool(np.all(g >= self.lo - 1e-9) and np.all(g <= self.hi + 1e-9))


@njit(cache=True, inline="always")
def _interp(v, nnodes, strides, lo, dg, gc, pp, lam, i0, fr):
    d = nnodes.shape[0]
    for dim in range(d):
        x = (1.0 - lam) * gc[dim] + lam * pp[dim]
        t = (x - lo[dim]) / dg[dim]
        j = int(np.floor(t))
        if j < 0:
            j = 0
        if j > nnodes[dim] - 2:
            j = nnodes[dim] - 2
        f = t - j
        if f < 0.0:
            f = 0.0
        elif f > 1.0:
            f = 1.0
        i0[dim] = j
        fr[dim] = f
    acc = 0.0
    for corner in range(1 << d):
        weight = 1.0
        offset = 0
        for dim in range(d):
            if (corner >> dim) & 1:
                weight *= fr[dim]
                offset += (i0[dim] + 1) * strides[dim]
            else:
                weight *= 1.0 - fr[dim]
                offset += i0[dim] * strides[dim]
        acc += weight * v[offset]
    return acc


@njit(cache=True)
def _sweep_step(v_next, nnodes, strides, lo, dg, pay, nx, ny, lam, minmax, v_out):
    d = nnodes.shape[0]
    i0 = np.empty(d, np.int64)
    fr = np.empty(d, np.float64)
    gc = np.empty(d, np.float64)
    for node in range(v_out.shape[0]):
        rem = node
        for dim in range(d):
            idx = rem // strides[dim]
            rem -= idx * strides[dim]
            gc[dim] = lo[dim] + idx * dg[dim]
        if minmax:
            outer = np.inf
            for ix in range(nx):
                inner = -np.inf
                for iy in range(ny):
                    val = _interp(
                        v_next, nnodes, strides, lo, dg, gc, pay[ix * ny + iy], lam, i0, fr
                    )
                    if val > inner:
                        inner = val
                if inner < outer:
                    outer = inner
        else:
            outer = -np.inf
            for iy in range(ny):
                inner = np.inf
                for ix in range(nx):
                    val = _interp(
                        v_next, nnodes, strides, lo, dg, gc, pay[ix * ny + iy], lam, i0, fr
                    )
                    if val < inner:
                        inner = val
                if inner > outer:
                    outer = inner
        v_out[node] = outer


@njit(cache=True)
def _action_values(v_next, nnodes, strides, lo, dg, pay, nx, ny, lam, g, minimizing):
    """Per-action inner optima at one state; ``minimizing`` picks the role.

    For the minimiser the result is, per x-index, the max over the y-grid;
    for the maximiser it is, per y-index, the min over the x-grid.
    """
    d = nnodes.shape[0]
    i0 = np.empty(d, np.int64)
    fr = np.empty(d, np.float64)
    if minimizing:
        out = np.empty(nx, np.float64)
        for ix in range(nx):
            inner = -np.inf
            for iy in range(ny):
                val = _interp(v_next, nnodes, strides, lo, dg, g, pay[ix * ny + iy], lam, i0, fr)
                if val > inner:
                    inner = val
            out[ix] = inner
    else:
        out = np.empty(ny, np.float64)
        for iy in range(ny):
            inner = np.inf
            for ix in range(nx):
                val = _interp(v_next, nnodes, strides, lo, dg, g, pay[ix * ny + iy], lam, i0, fr)
                if val < inner:
                    inner = val
            out[iy] = inner
    return out


def _strides(nnodes: np.ndarray) -> np.ndarray:
    strides = np.ones(nnodes.size, dtype=np.int64)
    for dim in range(nnodes.size - 2, -1, -1):
        strides[dim] = strides[dim + 1] * nnodes[dim + 1]
    return strides


def hamiltonian(game: VectorGame, s: float, g: np.ndarray, p: np.ndarray) -> float:
    """LP-exact Hamiltonian: value of the game p.(xAy - g)/s."""
    if s <= 0.0:
        raise SchemeError("hamiltonian needs s > 0")
    g = np.atleast_1d(np.asarray(g, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    scalarised = np.einsum("ijd,d->ij", game.payoffs, p)
    return (matrix_game_value(scalarised).value - float(p @ g)) / s


def solve_value(game: VectorGame, target: TargetSet, cfg: SchemeConfig) -> ValueGrid:
    """Backward semi-Lagrangian sweep from the terminal distance slice."""
    pay_lo, pay_hi = game.payoff_box()
    if cfg.box is not None:
        lo = np.asarray(cfg.box[0], dtype=float)
        hi = np.asarray(cfg.box[1], dtype=float)
        if np.any(lo > pay_lo + 1e-12) or np.any(hi < pay_hi - 1e-12):
            raise SchemeError("grid box does not contain the convex hull of payoffs")
    else:
        lo, hi = pay_lo.copy(), pay_hi.copy()
        flat = lo >= hi - 1e-12
        lo[flat] -= 0.5
        hi[flat] += 0.5
    if len(cfg.g_nodes) != game.d:
        raise SchemeError("g_nodes dimension does not match the payoff dimension")

    x_grid = simplex_grid(game.a, cfg.action_resolution if game.a > 1 else 2)
    y_grid = simplex_grid(game.b, cfg.action_resolution if game.b > 1 else 2)
    pay = np.einsum("xi,yj,ijd->xyd", x_grid, y_grid, game.payoffs).reshape(-1, game.d)

    nnodes = np.array(cfg.g_nodes, dtype=np.int64)
    strides = _strides(nnodes)
    dg = (hi - lo) / (nnodes - 1)
    total = int(np.prod(nnodes))
    s_values = np.linspace(cfg.s0, 1.0, cfg.steps + 1)

    values = np.empty((cfg.steps + 1, total))
    axes = [np.linspace(lo[i], hi[i], int(n)) for i, n in enumerate(nnodes)]
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    values[-1] = [target.distance(gp) for gp in nodes]

    minmax = cfg.order == MINMAX
    for k in range(cfg.steps - 1, -1, -1):
        lam = cfg.ds / s_values[k]
        _sweep_step(
            values[k + 1], nnodes, strides, lo, dg, pay,
            x_grid.shape[0], y_grid.shape[0], lam, minmax, values[k],
        )
    return ValueGrid(
        game=game,
        cfg=cfg,
        s_values=s_values,
        lo=lo,
        hi=hi,
        values=values.reshape(cfg.steps + 1, *cfg.g_nodes),
        x_grid=x_grid,
        y_grid=y_grid,
        pay=pay,
    )


def recompute_slice(vg: ValueGrid, k: int) -> np.ndarray:
    """Redo backward step k from slice k+1; used to check the one-step identity."""
    nnodes = np.array(vg.cfg.g_nodes, dtype=np.int64)
    out = np.empty(int(np.prod(nnodes)))
    _sweep_step(
        vg.values[k + 1].ravel(), nnodes, _strides(nnodes), vg.lo, vg.dg, vg.pay,
        vg.x_grid.shape[0], vg.y_grid.shape[0], vg.ds / vg.s_values[k],
        vg.cfg.order == MINMAX, out,
    )
    return out.reshape(vg.cfg.g_nodes)


def value_at_zero(vg: ValueGrid) -> tuple[float, float]:
    """Estimate of the (g-independent) value at time 0 and an error bound."""
    first = vg.values[0].ravel()
    estimate = float(np.mean(first))
    spread = float(np.max(first) - np.min(first))
    slack = 2.0 * (float(np.max(vg.dg)) + vg.ds)
    bound = 2.0 * vg.game.kappa * vg.cfg.s0 + spread + slack
    return estimate, bound


def feedback_action(vg: ValueGrid, s: float, g: np.ndarray, player: int = 1) -> MixedAction:
    """Optimal grid action at (s, g) against the next time slice.

    Player 1 minimises, player 2 maximises; ties go to the first index of the
    lexicographically ordered action grid.
    """
    g = np.atleast_1d(np.asarray(g, dtype=float))
    if not vg.contains(g):
        raise SchemeError(f"state {g} outside the grid box")
    if not vg.s_values[0] <= s < vg.s_values[-1]:
        raise SchemeError(f"time {s} outside [s0, 1)")
    v_next = vg.slice_at(min(s + vg.ds, 1.0))
    nnodes = np.array(vg.cfg.g_nodes, dtype=np.int64)
    vals = _action_values(
        v_next, nnodes, _strides(nnodes), vg.lo, vg.dg, vg.pay,
        vg.x_grid.shape[0], vg.y_grid.shape[0], vg.ds / s, g, player == 1,
    )
    if player == 1:
        return MixedAction(vg.x_grid[int(np.argmin(vals))])
    return MixedAction(vg.y_grid[int(np.argmax(vals))])


def isaacs_gap(game: VectorGame, target: TargetSet, cfg: SchemeConfig) -> float:
    """Sup-norm gap between the two optimisation orders."""
    upper = solve_value(game, target, replace(cfg, order=MINMAX))
    lower = solve_value(game, target, replace(cfg, order=MAXMIN))
    return float(np.max(np.abs(upper.values - lower.values)))


APPROACHABLE = "weakly approachable"
EXCLUDABLE = "weakly excludable"
INCONCLUSIVE = "inconclusive — refine"


def classify(game: VectorGame, target: TargetSet, cfg: SchemeConfig, tol: float = 0.1) -> dict:
    """Solve, estimate the time-0 value and emit a verdict at tolerance ``tol``."""
    vg = solve_value(game, target, cfg)
    estimate, bound = value_at_zero(vg)
    if estimate + bound <= tol:
        verdict = APPROACHABLE
    elif estimate - bound >= tol:
        verdict = EXCLUDABLE
    else:
        verdict = INCONCLUSIVE
    return {"estimate": estimate, "bound": bound, "verdict": verdict, "grid": vg}


def save_value_grid(vg: ValueGrid, path: str) -> None:
    """Binary container: arrays plus an embedded JSON metadata block."""
    meta = {
        "s0": vg.cfg.s0,
        "steps": vg.cfg.steps,
        "g_nodes": list(vg.cfg.g_nodes),
        "action_resolution": vg.cfg.action_resolution,
        "order": vg.cfg.order,
        "kappa": vg.game.kappa,
    }
    np.savez(
        path,
        meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
        payoffs=vg.game.payoffs,
        values=vg.values,
        s_values=vg.s_values,
        lo=vg.lo,
        hi=vg.hi,
    )


def load_value_grid(path: str) -> ValueGrid:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        game = VectorGame(data["payoffs"])
        cfg = SchemeConfig(
            s0=meta["s0"],
            steps=meta["steps"],
            g_nodes=tuple(meta["g_nodes"]),
            action_resolution=meta["action_resolution"],
            order=meta["order"],
            box=(data["lo"], data["hi"]),
        )
        x_grid = simplex_grid(game.a, cfg.action_resolution if game.a > 1 else 2)
        y_grid = simplex_grid(game.b, cfg.action_resolution if game.b > 1 else 2)
        pay = np.einsum("xi,yj,ijd->xyd", x_grid, y_grid, game.payoffs).reshape(-1, game.d)
        return ValueGrid(
            game=game,
            cfg=cfg,
            s_values=data["s_values"],
            lo=data["lo"],
            hi=data["hi"],
            values=data["values"],
            x_grid=x_grid,
            y_grid=y_grid,
            pay=pay,
        )


def slices_to_rows(vg: ValueGrid):
    """Yield CSV rows (s, g_1..g_d, V) over the whole grid."""
    nodes = vg.node_points()
    flat = vg.values.reshape(vg.cfg.steps + 1, -1)
    for k, s in enumerate(vg.s_values):
        for point, val in zip(nodes, flat[k]):
            yield (s, *point, val)
