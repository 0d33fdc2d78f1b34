"""Auxiliary game on the space of measures over (action, signal) pairs.

State is the empirical distribution of played pairs on a fixed product grid.
The greedy player projects the state onto the compatible-distribution
polytope in squared Wasserstein-2 cost, reads the transport potential, and
plays a minimax action of the potential-scalarised matrix game over
delta-restricted simplices; the restriction keeps every grid weight bounded
away from zero so the potentials are well defined everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import LpProblem, matrix_game_value, solve_lp
from .monitoring import EtildePolytope
from .transport import DiscreteMeasure, TransportError, w2, project_to_measure_polytope

#: squared diameter of a probability simplex (distance between two vertices)
SIMPLEX_DIAM_SQ = 2.0


def restriction_weight(delta: float, diam_sq: float = SIMPLEX_DIAM_SQ) -> float:
    """Mixing weight toward uniform keeping the shift below delta."""
    if delta <= 0.0:
        raise TransportError("delta must be > 0")
    return min(1.0, delta * delta / diam_sq)


def restrict(weights: np.ndarray, lam: float) -> np.ndarray:
    """Affine pull toward the uniform vector; floors every entry at lam/n."""
    w = np.asarray(weights, dtype=float)
    return (1.0 - lam) * w + lam / w.size


def substituted_matrix(phi: np.ndarray, lam_row: float, lam_col: float) -> np.ndarray:
    """Payoff matrix of the game after substituting restricted simplices.

    With p = (1-lam) q + lam u on both sides, the bilinear payoff in the
    original variables becomes a plain bilinear form in the free variables q;
    this returns its matrix.
    """
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    nr, nc = phi.shape
    u_r = np.full(nr, 1.0 / nr)
    u_c = np.full(nc, 1.0 / nc)
    base = u_r @ phi @ u_c
    return (
        (1.0 - lam_row) * (1.0 - lam_col) * phi
        + (1.0 - lam_row) * lam_col * (phi @ u_c)[:, None]
        + lam_row * (1.0 - lam_col) * (u_r @ phi)[None, :]
        + lam_row * lam_col * base
    )


def lex_min_minimax(matrix: np.ndarray, slack: float = 1e-9) -> np.ndarray:
    """Lexicographically smallest row strategy among the minimax-optimal ones.

    Solves the game for its value, then minimises the coordinates one at a
    time subject to staying within ``slack`` of optimal.
    """
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    a, b = m.shape
    value = matrix_game_value(m).value
    fixed: list[float] = []
    for coord in range(a - 1):
        a_ub = np.vstack([m.T, np.eye(len(fixed), a)]) if fixed else m.T
        b_ub = np.concatenate([np.full(b, value + slack), np.array(fixed) + slack]) if fixed else np.full(b, value + slack)
        res = solve_lp(
            LpProblem(
                objective=np.eye(1, a, coord).ravel(),
                a_ub=a_ub,
                b_ub=b_ub,
                a_eq=np.ones((1, a)),
                b_eq=np.ones(1),
            )
        )
        if res.status != "optimal":
            break
        fixed.append(float(res.x[coord]))
    if len(fixed) < a - 1:
        return matrix_game_value(m).xstar.weights
    x = np.array(fixed + [max(0.0, 1.0 - sum(fixed))])
    return x / x.sum()


def w_hamiltonian(
    s: float,
    mu: np.ndarray,
    phi: np.ndarray,
    lam_row: float,
    lam_col: float,
) -> float:
    """Potential-scalarised Hamiltonian at clock s over restricted simplices.

    ``mu`` and ``phi`` are (rows x cols) arrays on the product grid; the
    result is (minimax of the restricted game minus the mean of phi under
    mu) divided by s.
    """
    if s <= 0.0:
        raise TransportError("hamiltonian needs s > 0")
    mu = np.atleast_2d(np.asarray(mu, dtype=float))
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    value = matrix_game_value(substituted_matrix(phi, lam_row, lam_col)).value
    return (value - float(np.sum(mu * phi))) / s


def hamiltonian_inequality_residual(
    t: float,
    nu: DiscreteMeasure,
    s: float,
    mu: DiscreteMeasure,
    shape: tuple[int, int],
    delta: float,
) -> float:
    """t H(t, nu, -phistar) - s H(s, mu, phi) - W2^2(mu, nu); >= 0 up to LP slack.

    ``mu`` and ``nu`` must share the same product-grid support, listed
    row-major with the given shape, so the transport potentials reshape into
    matrices.
    """
    if len(mu) != shape[0] * shape[1] or len(nu) != len(mu):
        raise TransportError("measures must live on the full product grid")
    res = w2(mu, nu)
    lam_r = restriction_weight(delta)
    lam_c = restriction_weight(delta)
    phi = res.phi.reshape(shape)
    phistar = res.phistar.reshape(shape)
    lhs = t * w_hamiltonian(t, nu.weights.reshape(shape), -phistar, lam_r, lam_c)
    rhs = s * w_hamiltonian(s, mu.weights.reshape(shape), phi, lam_r, lam_c)
    return lhs - rhs - res.cost


@dataclass(frozen=True)
class GreedyStep:
    """One greedy decision: restricted action, certificate and diagnostics."""

    x_weights: np.ndarray  # restricted distribution over own action grid
    z_weights: np.ndarray  # restricted maximiser over the signal alphabet
    qstar: DiscreteMeasure  # projection of the state onto the polytope
    cost: float  # squared W2 distance of the state to the polytope
    phi: np.ndarray  # transport potential on the grid


def greedy_step(et: EtildePolytope, theta: DiscreteMeasure, delta: float, cost_tol: float = 1e-10) -> GreedyStep:
    """Potential-descent action against the compatible-distribution polytope.

    When the state is already inside the polytope any action is optimal and
    the lexicographically smallest restricted action is returned; otherwise
    the transport potential from the projection scalarises the game and the
    lexicographically smallest minimax action is played.
    """
    if not et.feasible:
        raise TransportError("compatible-distribution polytope is empty")
    qstar, cost = project_to_measure_polytope(theta, et)
    res = w2(theta, qstar)
    nx, na = et.n_actions, et.n_signals
    lam = restriction_weight(delta)
    phi = res.phi.reshape(nx, na)
    sub = substituted_matrix(phi, lam, lam)
    if cost <= cost_tol:
        x_free = np.eye(1, nx, 0).ravel()
    else:
        x_free = lex_min_minimax(sub)
    z_free = matrix_game_value(sub).ystar.weights
    return GreedyStep(
        x_weights=restrict(x_free, lam),
        z_weights=restrict(z_free, lam),
        qstar=qstar,
        cost=cost,
        phi=res.phi,
    )


class StationaryLifted:
    """Fixed distribution over the signal alphabet."""

    def __init__(self, z_weights: np.ndarray):
        self.z = np.asarray(z_weights, dtype=float)

    def act(self, m, theta_weights, step: GreedyStep):
        return self.z


class PureColumn:
    """Always the same pure signal column."""

    def __init__(self, n_signals: int, index: int):
        self.z = np.eye(1, n_signals, index).ravel()

    def act(self, m, theta_weights, step: GreedyStep):
        return self.z


class PotentialClimber:
    """Plays the maximiser of the current potential game."""

    def act(self, m, theta_weights, step: GreedyStep):
        return step.z_weights


@dataclass(frozen=True)
class WTrajectory:
    """Per-stage squared and plain W2 distance of the state to the polytope."""

    w2sq: np.ndarray  # (n,)
    weights: np.ndarray | None = None  # (n, grid size) when recorded

    @property
    def w2dist(self) -> np.ndarray:
        return np.sqrt(np.clip(self.w2sq, 0.0, None))

    def __len__(self) -> int:
        return self.w2sq.shape[0]


def run_wsim(
    et: EtildePolytope,
    adversary,
    horizon: int,
    delta: float,
    smooth_state: bool = True,
    x_fixed: np.ndarray | None = None,
    record_weights: bool = False,
) -> tuple[WTrajectory, DiscreteMeasure]:
    """Potential-descent play for ``horizon`` stages against an adversary.

    The state recursion is exact: theta_m = theta_{m-1} + (sigma - theta)/m
    with sigma the product of the two stage actions on the grid.  When
    ``smooth_state`` is set the copy handed to the potential computation is
    mixed toward uniform with the delta floor (the recorded state is not).
    ``x_fixed`` replaces the greedy choice with a constant restricted action.
    """
    grid = et.grid_points
    gsize = grid.shape[0]
    lam = restriction_weight(delta)
    weights = None
    w2sq = np.empty(horizon)
    dump = np.empty((horizon, gsize)) if record_weights else None
    for m in range(1, horizon + 1):
        current = np.full(gsize, 1.0 / gsize) if weights is None else weights
        view = restrict(current, lam) if smooth_state else current
        step = greedy_step(et, DiscreteMeasure(grid, view / view.sum()), delta)
        x = step.x_weights if x_fixed is None else np.asarray(x_fixed, dtype=float)
        z = np.asarray(adversary.act(m, current, step), dtype=float)
        sigma = np.outer(x, z).ravel()
        weights = sigma if weights is None else current + (sigma - current) / m
        if dump is not None:
            dump[m - 1] = weights
        # renormalise only the measure handed out; the recursion stays exact
        state = DiscreteMeasure(grid, weights / weights.sum())
        _, cost = project_to_measure_polytope(state, et)
        w2sq[m - 1] = cost
    return WTrajectory(w2sq=w2sq, weights=dump), state
