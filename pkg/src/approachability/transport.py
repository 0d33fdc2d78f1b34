"""Exact discrete optimal transport with normalised dual potentials.

Squared-Euclidean cost throughout.  Plans come from the transportation LP;
potentials are the LP duals canonicalised by a double conjugation (so the
pair is mutually conjugate and inherits the 2*diameter Lipschitz bound) and
anchored to vanish at the first support point of the source measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import LpProblem, LpResult, solve_lp


class TransportError(ValueError):
    """Invalid measures or an infeasible projection."""


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported probability measure: ``points`` (n, dim), ``weights`` (n,)."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if pts.shape[0] != w.shape[0]:
            raise TransportError("points and weights disagree in count")
        if np.min(w) < -1e-12:
            raise TransportError(f"negative weight {np.min(w)}")
        if abs(float(np.sum(w)) - 1.0) > 1e-12:
            raise TransportError(f"weights sum to {np.sum(w)}")
        if pts.shape[0] > 1:
            gaps = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
            np.fill_diagonal(gaps, np.inf)
            if np.min(gaps) < 1e-12:
                raise TransportError("support points are not pairwise distinct")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class TransportResult:
    """Optimal plan, squared-distance cost and Kantorovich-style potentials."""

    plan: np.ndarray
    cost: float
    phi: np.ndarray
    phistar: np.ndarray
    anchor_index: int = 0


def cost_matrix(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances."""
    diff = xs[:, None, :] - ys[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def conjugate(phi: np.ndarray, support: np.ndarray, opposite: np.ndarray) -> np.ndarray:
    """phistar(y) = min over the support of |x - y|^2 - phi(x)."""
    c = cost_matrix(np.atleast_2d(support), np.atleast_2d(opposite))
    return np.min(c - np.asarray(phi, dtype=float)[:, None], axis=0)


def w2(mu: DiscreteMeasure, nu: DiscreteMeasure) -> TransportResult:
    """Solve the transportation LP between two discrete measures."""
    if mu.dim != nu.dim:
        raise TransportError(f"ambient dimensions differ: {mu.dim} vs {nu.dim}")
    n, m = len(mu), len(nu)
    c = cost_matrix(mu.points, nu.points)

    a_eq = np.zeros((n + m, n * m))
    for i in range(n):
        a_eq[i, i * m : (i + 1) * m] = 1.0
    for j in range(m):
        a_eq[n + j, j::m] = 1.0
    b_eq = np.concatenate([mu.weights, nu.weights])

    res = solve_lp(LpProblem(objective=c.ravel(), a_eq=a_eq, b_eq=b_eq))
    if res.status != "optimal":
        raise TransportError(f"transportation LP ended with status {res.status}")
    plan = res.x.reshape(n, m)
    cost = float(np.sum(plan * c))

    if cost <= 1e-14:
        # zero potentials are dual-optimal iff the cost is zero
        u = np.zeros(n)
        v = np.min(c, axis=0)
    else:
        u, v = res.eq_duals[:n], res.eq_duals[n:]
        # canonicalise: mutually conjugate pair, then anchor phi at the first point
        v = np.min(c - u[:, None], axis=0)
        u = np.min(c - v[None, :], axis=1)
    shift = u[0]
    return TransportResult(plan=plan, cost=cost, phi=u - shift, phistar=v + shift)


def w2_distance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    return float(np.sqrt(max(w2(mu, nu).cost, 0.0)))


def smooth_delta(mu: DiscreteMeasure, delta: float, reference: DiscreteMeasure) -> DiscreteMeasure:
    """Mix toward the uniform reference so every grid weight has a floor.

    With mixing weight lambda = min(1, delta^2 / D^2), D the grid diameter,
    the output is within delta of ``mu`` in W2 and every grid weight is at
    least lambda / (grid size).
    """
    if delta <= 0.0:
        raise TransportError("delta must be > 0")
    grid = reference.points
    gsize = grid.shape[0]
    diam2 = float(np.max(cost_matrix(grid, grid)))
    if diam2 <= 0.0:
        raise TransportError("support grid has zero diameter")
    lam = min(1.0, delta * delta / diam2)

    base = np.zeros(gsize)
    for point, weight in zip(mu.points, mu.weights):
        hits = np.where(np.linalg.norm(grid - point, axis=1) <= 1e-9)[0]
        if hits.size == 0:
            raise TransportError("measure is not supported on the reference grid")
        base[hits[0]] += weight
    mixed = (1.0 - lam) * base + lam / gsize
    return DiscreteMeasure(grid, mixed / mixed.sum())


def project_to_measure_polytope(theta: DiscreteMeasure, constraints) -> tuple[DiscreteMeasure, float]:
    """Squared-W2 projection of ``theta`` onto a weight polytope on a fixed grid.

    ``constraints`` carries ``grid_points`` (G, dim), ``constraint_matrix``
    (F, G) and ``constraint_bounds`` (F,); feasible weights q satisfy
    ``constraint_matrix @ q <= constraint_bounds``.  The plan and q are found
    jointly in a single LP.
    """
    grid = np.atleast_2d(np.asarray(constraints.grid_points, dtype=float))
    rows = np.atleast_2d(np.asarray(constraints.constraint_matrix, dtype=float))
    bnds = np.atleast_1d(np.asarray(constraints.constraint_bounds, dtype=float))
    if theta.dim != grid.shape[1]:
        raise TransportError("theta and constraint grid dimensions differ")
    n, g = len(theta), grid.shape[0]
    c = cost_matrix(theta.points, grid)

    nvar = n * g + g
    a_eq = np.zeros((n + g, nvar))
    for i in range(n):
        a_eq[i, i * g : (i + 1) * g] = 1.0
    for j in range(g):
        a_eq[n + j, j : n * g : g] = 1.0
        a_eq[n + j, n * g + j] = -1.0
    b_eq = np.concatenate([theta.weights, np.zeros(g)])
    a_ub = np.hstack([np.zeros((rows.shape[0], n * g)), rows])

    res = solve_lp(
        LpProblem(
            objective=np.concatenate([c.ravel(), np.zeros(g)]),
            a_ub=a_ub,
            b_ub=bnds,
            a_eq=a_eq,
            b_eq=b_eq,
        )
    )
    if res.status != "optimal":
        raise TransportError(f"measure-polytope projection is {res.status}")
    q = np.clip(res.x[n * g :], 0.0, None)
    q = q / q.sum()
    return DiscreteMeasure(grid, q), float(res.objective)
