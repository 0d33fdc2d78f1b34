"""Linear programming and matrix-game values.

Thin, typed layer over scipy's HiGHS backend.  Matrix games are solved with
the standard value-variable LP on both sides, so every value comes with a
minimax = maximin certificate instead of relying on one solve's duals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .games import MixedAction

#: agreement required between the two one-sided game LPs
DUALITY_TOL = 1e-8


class LpError(RuntimeError):
    """Solver returned an unexpected status."""


@dataclass(frozen=True)
class LpProblem:
    """min objective . x  s.t.  a_ub x <= b_ub,  a_eq x = b_eq,  bounds."""

    objective: np.ndarray
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    bounds: list[tuple[float | None, float | None]] | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        object.__setattr__(self, "objective", c)
        for name in ("a_ub", "b_ub", "a_eq", "b_eq"):
            val = getattr(self, name)
            if val is not None:
                arr = np.asarray(val, dtype=float)
                if not np.all(np.isfinite(arr)):
                    raise LpError(f"non-finite coefficients in {name}")
                object.__setattr__(self, name, arr)
        if self.a_ub is not None and self.a_ub.shape[1] != c.size:
            raise LpError("a_ub width does not match objective")
        if self.a_eq is not None and self.a_eq.shape[1] != c.size:
            raise LpError("a_eq width does not match objective")


@dataclass(frozen=True)
class LpResult:
    """Outcome of one solve; ``status`` is 'optimal', 'infeasible' or 'unbounded'."""

    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    ineq_duals: np.ndarray | None = None
    eq_duals: np.ndarray | None = None


_STATUS = {0: "optimal", 2: "infeasible", 3: "unbounded"}


def solve_lp(problem: LpProblem) -> LpResult:
    """Solve an LP; infeasible and unbounded are outcomes, not errors."""
    bounds = problem.bounds if problem.bounds is not None else [(0.0, None)] * problem.objective.size
    res = linprog(
        problem.objective,
        A_ub=problem.a_ub,
        b_ub=problem.b_ub,
        A_eq=problem.a_eq,
        b_eq=problem.b_eq,
        bounds=bounds,
        method="highs",
    )
    status = _STATUS.get(res.status)
    if status is None:
        raise LpError(f"LP solver failed: {res.message}")
    if status != "optimal":
        return LpResult(status=status)
    return LpResult(
        status="optimal",
        x=np.atleast_1d(res.x),
        objective=float(res.fun),
        ineq_duals=None if problem.a_ub is None else np.atleast_1d(res.ineqlin.marginals),
        eq_duals=None if problem.a_eq is None else np.atleast_1d(res.eqlin.marginals),
    )


@dataclass(frozen=True)
class GameSolution:
    value: float
    xstar: MixedAction
    ystar: MixedAction


def _clean_simplex(w: np.ndarray) -> MixedAction:
    w = np.clip(np.asarray(w, dtype=float), 0.0, None)
    return MixedAction(w / w.sum())


def matrix_game_value(matrix: np.ndarray) -> GameSolution:
    """Value of the zero-sum matrix game where the row player minimises x'My.

    Solves the value-variable LP for each player and checks that the two
    objectives agree to DUALITY_TOL.
    """
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    if not np.all(np.isfinite(m)):
        raise LpError("matrix game with non-finite entries")
    a, b = m.shape

    # row player: min v  s.t.  (x'M)_j <= v,  x in simplex
    a_ub = np.hstack([m.T, -np.ones((b, 1))])
    a_eq = np.hstack([np.ones((1, a)), np.zeros((1, 1))])
    row = solve_lp(
        LpProblem(
            objective=np.append(np.zeros(a), 1.0),
            a_ub=a_ub,
            b_ub=np.zeros(b),
            a_eq=a_eq,
            b_eq=np.ones(1),
            bounds=[(0.0, None)] * a + [(None, None)],
        )
    )
    # column player: max w  s.t.  (My)_i >= w,  y in simplex
    a_ub2 = np.hstack([-m, np.ones((a, 1))])
    a_eq2 = np.hstack([np.ones((1, b)), np.zeros((1, 1))])
    col = solve_lp(
        LpProblem(
            objective=np.append(np.zeros(b), -1.0),
            a_ub=a_ub2,
            b_ub=np.zeros(a),
            a_eq=a_eq2,
            b_eq=np.ones(1),
            bounds=[(0.0, None)] * b + [(None, None)],
        )
    )
    if row.status != "optimal" or col.status != "optimal":
        raise LpError("matrix game LP did not solve to optimality")
    v_row = float(row.x[-1])
    v_col = float(-col.objective)
    if abs(v_row - v_col) > DUALITY_TOL:
        raise LpError(f"minimax/maximin disagree: {v_row} vs {v_col}")
    return GameSolution(
        value=0.5 * (v_row + v_col),
        xstar=_clean_simplex(row.x[:a]),
        ystar=_clean_simplex(col.x[:b]),
    )
