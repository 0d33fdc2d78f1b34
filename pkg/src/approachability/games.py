"""Bilinear vector-payoff games on mixed-action simplices and target-set geometry.

A game is given by an ``a x b`` array of ``d``-dimensional payoff vectors; both
players mix over their pure actions, so the stage outcome is the bilinear
average of the payoff vectors.  Target sets are closed subsets of payoff space
supporting exact distance, projection and (for polytopes) support-function
queries.  Everything here is immutable and pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np


class GameError(ValueError):
    """Invalid game data."""


class DimensionMismatch(GameError):
    """Operands with incompatible shapes."""


class UnboundedDirection(GameError):
    """Support function query along a direction where the set is unbounded."""


_SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class MixedAction:
    """Probability vector over pure actions."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or w.size < 1:
            raise GameError("mixed action must be a nonempty vector")
        if not np.all(np.isfinite(w)):
            raise GameError("mixed action has non-finite entries")
        if np.min(w) < -_SIMPLEX_TOL:
            raise GameError(f"negative weight {np.min(w)}")
        if abs(float(np.sum(w)) - 1.0) > _SIMPLEX_TOL:
            raise GameError(f"weights sum to {np.sum(w)}, expected 1")

    def __len__(self) -> int:
        return self.weights.size

    @staticmethod
    def uniform(n: int) -> "MixedAction":
        return MixedAction(np.full(n, 1.0 / n))

    @staticmethod
    def pure(n: int, i: int) -> "MixedAction":
        w = np.zeros(n)
        w[i] = 1.0
        return MixedAction(w)


@dataclass(frozen=True)
class VectorGame:
    """Bilinear vector-payoff game.

    ``payoffs`` has shape ``(a, b, d)``; ``kappa`` is recomputed at
    construction as the largest Euclidean norm among the payoff vectors and
    upper-bounds every mixed payoff.
    """

    payoffs: np.ndarray
    kappa: float = field(init=False)

    def __post_init__(self):
        arr = np.asarray(self.payoffs, dtype=float)
        if arr.ndim != 3:
            raise GameError(f"payoff array must be (a, b, d), got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise GameError("a, b, d must all be >= 1")
        if not np.all(np.isfinite(arr)):
            raise GameError("payoff array has non-finite entries")
        object.__setattr__(self, "payoffs", arr)
        object.__setattr__(self, "kappa", float(np.max(np.linalg.norm(arr, axis=2))))

    @property
    def a(self) -> int:
        return self.payoffs.shape[0]

    @property
    def b(self) -> int:
        return self.payoffs.shape[1]

    @property
    def d(self) -> int:
        return self.payoffs.shape[2]

    def payoff_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-dimension bounds of the convex hull of pure payoffs."""
        flat = self.payoffs.reshape(-1, self.d)
        return flat.min(axis=0), flat.max(axis=0)


def payoff(game: VectorGame, x: MixedAction, y: MixedAction) -> np.ndarray:
    """Bilinear mixed payoff: sum_ij x[i] y[j] A[i][j]."""
    if len(x) != game.a or len(y) != game.b:
        raise DimensionMismatch(
            f"actions ({len(x)}, {len(y)}) do not match game ({game.a}, {game.b})"
        )
    return np.einsum("i,j,ijd->d", x.weights, y.weights, game.payoffs)


class TargetSet:
    """Closed target set with exact distance and projection."""

    def project(self, g: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance(self, g: np.ndarray) -> float:
        g = np.asarray(g, dtype=float)
        if not np.all(np.isfinite(g)):
            raise GameError("distance query at non-finite point")
        return float(np.linalg.norm(g - self.project(g)))


@dataclass(frozen=True)
class HalfSpace(TargetSet):
    """{z : normal . z <= offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.normal, dtype=float))
        if np.linalg.norm(u) == 0.0:
            raise GameError("half-space normal must be nonzero")
        object.__setattr__(self, "normal", u)
        object.__setattr__(self, "offset", float(self.offset))

    def project(self, g: np.ndarray) -> np.ndarray:
        g = np.atleast_1d(np.asarray(g, dtype=float))
        u = self.normal
        excess = float(u @ g) - self.offset
        if excess <= 0.0:
            return g.copy()
        return g - (excess / float(u @ u)) * u


@dataclass(frozen=True)
class Ball(TargetSet):
    """Closed Euclidean ball; radius 0 encodes a point target."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius < 0.0:
            raise GameError("ball radius must be >= 0")

    def project(self, g: np.ndarray) -> np.ndarray:
        g = np.atleast_1d(np.asarray(g, dtype=float))
        delta = g - self.center
        dist = float(np.linalg.norm(delta))
        if dist <= self.radius:
            return g.copy()
        if dist == 0.0:
            return self.center.copy()
        return self.center + (self.radius / dist) * delta


@dataclass(frozen=True)
class Polytope(TargetSet):
    """Intersection of half-spaces {z : N z <= c}, optionally with vertices.

    Nonemptiness is certified at construction with a feasibility LP.
    Projection is exact: the active facet subset is found by enumeration,
    which is cheap at desk scale and avoids iterative QP tolerances.
    """

    normals: np.ndarray
    offsets: np.ndarray
    vertices: np.ndarray | None = None

    def __post_init__(self):
        n = np.atleast_2d(np.asarray(self.normals, dtype=float))
        c = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        if n.shape[0] != c.shape[0]:
            raise GameError("facet normals and offsets disagree in count")
        object.__setattr__(self, "normals", n)
        object.__setattr__(self, "offsets", c)
        if self.vertices is not None:
            v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
            object.__setattr__(self, "vertices", v)
        from . import lp  # deferred: lp has no dependency on this module

        res = lp.solve_lp(
            lp.LpProblem(
                objective=np.zeros(n.shape[1]),
                a_ub=n,
                b_ub=c,
                bounds=[(None, None)] * n.shape[1],
            )
        )
        if res.status != "optimal":
            raise GameError("polytope is empty")

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    def project(self, g: np.ndarray) -> np.ndarray:
        g = np.atleast_1d(np.asarray(g, dtype=float))
        n, c = self.normals, self.offsets
        if np.all(n @ g <= c + 1e-12):
            return g.copy()
        best, best_d2 = None, np.inf
        n_facets, d = n.shape
        for r in range(1, min(n_facets, d) + 1):
            for subset in combinations(range(n_facets), r):
                nj = n[list(subset)]
                cj = c[list(subset)]
                gram = nj @ nj.T
                lam, *_ = np.linalg.lstsq(gram, nj @ g - cj, rcond=None)
                w = g - nj.T @ lam
                if np.all(n @ w <= c + 1e-9):
                    d2 = float(np.sum((w - g) ** 2))
                    if d2 < best_d2 - 1e-15:
                        best, best_d2 = w, d2
        if best is None:
            raise GameError("projection onto polytope failed")
        return best

    def support(self, u: np.ndarray) -> float:
        """sup of u . z over the polytope."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if self.vertices is not None:
            return float(np.max(self.vertices @ u))
        from . import lp

        res = lp.solve_lp(
            lp.LpProblem(
                objective=-u,
                a_ub=self.normals,
                b_ub=self.offsets,
                bounds=[(None, None)] * self.dim,
            )
        )
        if res.status == "unbounded":
            raise UnboundedDirection(f"polytope unbounded along {u}")
        if res.status != "optimal":
            raise GameError(f"support LP failed: {res.status}")
        return -res.objective


def support(target: Polytope, u: np.ndarray) -> float:
    return target.support(u)


@dataclass(frozen=True)
class FiniteUnion(TargetSet):
    """Finite union of target sets; projection ties go to the lowest index."""

    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise GameError("union must have at least one member")
        object.__setattr__(self, "members", members)

    def project(self, g: np.ndarray) -> np.ndarray:
        g = np.atleast_1d(np.asarray(g, dtype=float))
        best, best_d = None, np.inf
        for member in self.members:
            w = member.project(g)
            dist = float(np.linalg.norm(g - w))
            if dist < best_d:
                best, best_d = w, dist
        return best


def distance(target: TargetSet, g: np.ndarray) -> float:
    return target.distance(g)


def project(target: TargetSet, g: np.ndarray) -> np.ndarray:
    return target.project(np.asarray(g, dtype=float))
