"""Partial-monitoring reduction.

The observer sees only a signal vector attached to the opponent's mixed
action, so each observed pair (own action, signal) pins the stage payoff down
to a polytope: the image of the signal fiber under the bilinear payoff map.
A distribution q over such pairs is "compatible" with a convex polytope
target E when the q-weighted Minkowski average of those payoff polytopes is
contained in E; containment reduces to one linear constraint on q per facet
of E via support functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .games import GameError, MixedAction, Polytope, VectorGame
from .grids import simplex_grid
from .lp import LpProblem, solve_lp
from .transport import DiscreteMeasure


class EmptyFiber(GameError):
    """No mixed action of the opponent produces the requested signal."""


@dataclass(frozen=True)
class SignalStructure:
    """Column j of ``columns`` (k x b) is the signal of opponent pure action j."""

    columns: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.columns, dtype=float))
        if not np.all(np.isfinite(s)):
            raise GameError("signal matrix has non-finite entries")
        object.__setattr__(self, "columns", s)

    @property
    def k(self) -> int:
        return self.columns.shape[0]

    @property
    def b(self) -> int:
        return self.columns.shape[1]

    def alphabet(self) -> np.ndarray:
        """Distinct pure-action signals, in order of first appearance."""
        seen: list[np.ndarray] = []
        for j in range(self.b):
            col = self.columns[:, j]
            if not any(np.linalg.norm(col - c) <= 1e-12 for c in seen):
                seen.append(col)
        return np.array(seen)

    @staticmethod
    def full_monitoring(b: int) -> "SignalStructure":
        return SignalStructure(np.eye(b))


@dataclass(frozen=True)
class FiberPolytope:
    """Vertices of {y in the simplex : S y = mu}."""

    mu: np.ndarray
    vertices: np.ndarray  # (count, b)


def fiber_vertices(signals: SignalStructure, mu: np.ndarray) -> FiberPolytope:
    """Exact vertex enumeration of the simplex slice with signal ``mu``.

    Vertices are basic feasible solutions, hence have support of size at most
    k + 1; candidate supports are enumerated directly (desk scale: b <= ~8).
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    s = signals.columns
    b = signals.b
    rhs = np.concatenate([[1.0], mu])
    found: list[np.ndarray] = []
    for size in range(1, min(b, signals.k + 1) + 1):
        for support in combinations(range(b), size):
            cols = np.vstack([np.ones(size), s[:, support]])
            if np.linalg.matrix_rank(cols, tol=1e-10) < size:
                continue  # non-unique on this support; covered by smaller ones
            sol, *_ = np.linalg.lstsq(cols, rhs, rcond=None)
            if np.min(sol) < -1e-10:
                continue
            if np.linalg.norm(cols @ sol - rhs) > 1e-9:
                continue
            y = np.zeros(b)
            y[list(support)] = np.clip(sol, 0.0, None)
            if not any(np.linalg.norm(y - v) <= 1e-9 for v in found):
                found.append(y)
    if not found:
        raise EmptyFiber(f"signal {mu} is not achievable")
    return FiberPolytope(mu=mu, vertices=np.array(sorted(found, key=tuple)))


def fiber_payoff_vertices(game: VectorGame, x: MixedAction, fiber: FiberPolytope) -> np.ndarray:
    """Images x A y of the fiber vertices; their hull is the payoff set."""
    return np.einsum("i,vj,ijd->vd", x.weights, fiber.vertices, game.payoffs)


def fiber_support(game: VectorGame, x: MixedAction, fiber: FiberPolytope, u: np.ndarray) -> float:
    """Support function of the payoff set {x A y : y in the fiber} at u."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return float(np.max(fiber_payoff_vertices(game, x, fiber) @ u))


@dataclass(frozen=True)
class EtildePolytope:
    """Linear constraints on grid weights encoding compatibility with E.

    ``grid`` lists the (action, signal) pairs; ``grid_points`` embeds them as
    concatenated vectors for transport purposes.  A weight vector q is
    compatible iff ``constraint_matrix @ q <= constraint_bounds``.
    """

    grid: tuple  # ((MixedAction, signal ndarray), ...)
    grid_points: np.ndarray
    payoff_sets: tuple  # payoff-vertex array per grid point
    constraint_matrix: np.ndarray
    constraint_bounds: np.ndarray
    feasible: bool
    n_actions: int = 0  # distinct own mixed actions on the grid
    n_signals: int = 0  # distinct signals; grid index = action * n_signals + signal

    def __len__(self) -> int:
        return self.grid_points.shape[0]


def build_etilde(
    game: VectorGame,
    target: Polytope,
    grid_x: list[MixedAction] | None,
    signals: SignalStructure,
) -> EtildePolytope:
    """Constraint representation of the compatible distributions over a grid.

    One row per facet normal u of E: the q-average of the payoff-set support
    values at u must not exceed the facet offset.  Exact for convex polytope
    targets; anything else is rejected.
    """
    if not isinstance(target, Polytope):
        raise GameError("compatible-distribution constraints need a convex polytope target")
    if signals.b != game.b:
        raise GameError("signal matrix width does not match the opponent action count")
    if grid_x is None:
        grid_x = [MixedAction(w) for w in simplex_grid(game.a, 3)]

    alphabet = signals.alphabet()
    grid: list[tuple[MixedAction, np.ndarray]] = []
    payoff_sets: list[np.ndarray] = []
    for x in grid_x:
        for mu in alphabet:
            fiber = fiber_vertices(signals, mu)
            grid.append((x, mu))
            payoff_sets.append(fiber_payoff_vertices(game, x, fiber))

    g = len(grid)
    rows = np.zeros((target.normals.shape[0], g))
    for f, u in enumerate(target.normals):
        for i, verts in enumerate(payoff_sets):
            rows[f, i] = float(np.max(verts @ u))
    bounds = target.offsets.copy()

    probe = solve_lp(
        LpProblem(
            objective=np.zeros(g),
            a_ub=rows,
            b_ub=bounds,
            a_eq=np.ones((1, g)),
            b_eq=np.ones(1),
        )
    )
    points = np.array([np.concatenate([x.weights, mu]) for x, mu in grid])
    return EtildePolytope(
        grid=tuple(grid),
        grid_points=points,
        payoff_sets=tuple(payoff_sets),
        constraint_matrix=rows,
        constraint_bounds=bounds,
        feasible=probe.status == "optimal",
        n_actions=len(grid_x),
        n_signals=alphabet.shape[0],
    )


def weights_on_grid(et: EtildePolytope, q: DiscreteMeasure) -> np.ndarray:
    """Align a measure's weights with the constraint grid; error on mismatch."""
    w = np.zeros(len(et))
    for point, weight in zip(q.points, q.weights):
        hits = np.where(np.linalg.norm(et.grid_points - point, axis=1) <= 1e-9)[0]
        if hits.size == 0:
            raise GameError("measure support does not lie on the constraint grid")
        w[hits[0]] += weight
    return w


def etilde_membership(et: EtildePolytope, q: DiscreteMeasure, tol: float = 1e-9) -> bool:
    """True when every support-function constraint holds within ``tol``."""
    w = weights_on_grid(et, q)
    return bool(np.all(et.constraint_matrix @ w <= et.constraint_bounds + tol))
