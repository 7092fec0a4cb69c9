"""Constrained convex generators restricted to infinity-norm generator blocks.

A set ``Z = (G, c, A, b, C)`` is ``{G xi + c : A xi = b, xi in C}`` where
every block of ``C`` is a unit infinity-norm ball, i.e. a constrained
zonotope.  Linear maps, Minkowski sums and intersections are exact and only
grow the matrices.  Membership, emptiness and interval hulls are linear
programs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .intervals import DimensionError, Interval
from .lp import LpProblem, LpStatus, solve

__all__ = ["Ccg", "EmptySetError", "LpFailure", "from_interval", "linear_map",
           "minkowski_sum", "intersect", "is_member", "is_empty",
           "interval_hull", "mc_volume"]

# large hull / membership programs go to HiGHS, the rest to the dense simplex
LP_METHOD = "highs"


class EmptySetError(ValueError):
    """The constraint system of a CCG has no solution."""


class LpFailure(RuntimeError):
    """The LP backend could not certify a result."""


@dataclass(frozen=True)
class Ccg:
    G: np.ndarray
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    blocks: tuple = ()

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if G.shape[0] != c.size:
            if G.size == 0:
                G = np.zeros((c.size, 0))
            else:
                raise DimensionError(f"G has {G.shape[0]} rows but c has {c.size} entries")
        ng = G.shape[1]
        A = np.asarray(self.A, dtype=float)
        A = A.reshape(-1, ng) if A.size else np.zeros((0, ng))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.size:
            raise DimensionError(f"A has {A.shape[0]} rows but b has {b.size} entries")
        blocks = tuple(int(m) for m in self.blocks)
        if sum(blocks) != ng:
            raise DimensionError(f"generator blocks cover {sum(blocks)} columns, G has {ng}")
        if ng > 0 and not blocks:
            raise DimensionError("a CCG with generators needs at least one block")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def ng(self) -> int:
        return self.G.shape[1]

    @property
    def nc(self) -> int:
        return self.A.shape[0]

    @classmethod
    def point(cls, v) -> "Ccg":
        v = np.asarray(v, dtype=float).reshape(-1)
        return cls(np.zeros((v.size, 0)), v, np.zeros((0, 0)), np.zeros(0), ())


def from_interval(iv: Interval) -> Ccg:
    n = iv.n
    return Ccg(np.diag(iv.radius), iv.center, np.zeros((0, n)), np.zeros(0), (n,))


def linear_map(R, z: Ccg) -> Ccg:
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape[1] != z.n:
        raise DimensionError(f"map has {R.shape[1]} columns, set has dimension {z.n}")
    return Ccg(R @ z.G, R @ z.c, z.A, z.b, z.blocks)


def minkowski_sum(x: Ccg, y: Ccg, *more: Ccg) -> Ccg:
    out = _sum2(x, y)
    for z in more:
        out = _sum2(out, z)
    return out


def _sum2(x: Ccg, y: Ccg) -> Ccg:
    if x.n != y.n:
        raise DimensionError(f"dimension mismatch: {x.n} vs {y.n}")
    G = np.hstack([x.G, y.G])
    A = block_diag(x.A, y.A) if (x.nc or y.nc) else np.zeros((0, x.ng + y.ng))
    A = A.reshape(x.nc + y.nc, x.ng + y.ng)
    return Ccg(G, x.c + y.c, A, np.concatenate([x.b, y.b]), x.blocks + y.blocks)


def intersect(x: Ccg, y: Ccg) -> Ccg:
    if x.n != y.n:
        raise DimensionError(f"dimension mismatch: {x.n} vs {y.n}")
    ng = x.ng + y.ng
    G = np.hstack([x.G, np.zeros((x.n, y.ng))])
    A = np.vstack([
        np.hstack([x.A, np.zeros((x.nc, y.ng))]),
        np.hstack([np.zeros((y.nc, x.ng)), y.A]),
        np.hstack([x.G, -y.G]),
    ]).reshape(-1, ng)
    b = np.concatenate([x.b, y.b, y.c - x.c])
    return Ccg(G, x.c, A, b, x.blocks + y.blocks)


def _feasibility_lp(z: Ccg, objective=None, extra_eq=None, extra_rhs=None) -> LpProblem:
    a_eq, b_eq = z.A, z.b
    if extra_eq is not None:
        a_eq = np.vstack([extra_eq, a_eq])
        b_eq = np.concatenate([extra_rhs, b_eq])
    obj = np.zeros(z.ng) if objective is None else objective
    return LpProblem(obj, a_eq=a_eq, b_eq=b_eq, lower=-np.ones(z.ng), upper=np.ones(z.ng))


def _solve(p: LpProblem):
    method = LP_METHOD if p.n > 40 else "simplex"
    sol = solve(p, method=method)
    if sol.status is LpStatus.NUMERICAL and method == "simplex":
        sol = solve(p, method="highs")
    if sol.status is LpStatus.NUMERICAL:
        raise LpFailure(sol.message)
    return sol


def is_member(z: Ccg, point, tol: float = 1e-9) -> bool:
    point = np.asarray(point, dtype=float).reshape(-1)
    if point.size != z.n:
        raise DimensionError(f"point has {point.size} entries, set has dimension {z.n}")
    if z.ng == 0:
        at_center = np.allclose(point, z.c, rtol=0, atol=tol)
        return bool(at_center and np.allclose(z.b, 0.0, rtol=0, atol=tol))
    if z.nc == 0 and z.ng == z.n:
        # unconstrained zonotope with square generators: xi is unique when G is invertible
        try:
            xi = np.linalg.solve(z.G, point - z.c)
        except np.linalg.LinAlgError:
            pass
        else:
            if np.linalg.cond(z.G) < 1e10:
                return bool(np.max(np.abs(xi)) <= 1.0 + tol)
    sol = _solve(_feasibility_lp(z, extra_eq=z.G, extra_rhs=point - z.c))
    return sol.status is LpStatus.OPTIMAL


def is_empty(z: Ccg) -> bool:
    if z.nc == 0:
        return False
    if z.ng == 0:
        return not np.allclose(z.b, 0.0, rtol=0, atol=1e-9)
    sol = _solve(_feasibility_lp(z))
    return sol.status is not LpStatus.OPTIMAL


def interval_hull(z: Ccg) -> Interval:
    """Per-coordinate min and max of ``G xi + c`` over the feasible ``xi``.

    Raises :class:`EmptySetError` when the set is empty.
    """
    if z.nc == 0:
        r = np.abs(z.G).sum(axis=1)
        return Interval(z.c - r, z.c + r)
    if z.ng == 0:
        if is_empty(z):
            raise EmptySetError("CCG constraint system is infeasible")
        return Interval.point(z.c)
    lower = np.empty(z.n)
    upper = np.empty(z.n)
    for i in range(z.n):
        for sign, out in ((1.0, lower), (-1.0, upper)):
            sol = _solve(_feasibility_lp(z, objective=sign * z.G[i]))
            if sol.status is LpStatus.INFEASIBLE:
                raise EmptySetError("CCG constraint system is infeasible")
            if sol.status is not LpStatus.OPTIMAL:
                raise LpFailure(f"hull LP ended with status {sol.status.value}")
            out[i] = sign * sol.objective_value + z.c[i]
    # solver noise can cross over on degenerate coordinates
    upper = np.maximum(upper, lower)
    return Interval(lower, upper)


def mc_volume(z: Ccg, samples: int, rng: np.random.Generator) -> float:
    """Hit-or-miss volume estimate inside the interval hull."""
    if samples < 1:
        raise ValueError("samples must be positive")
    box = interval_hull(z)
    vol = box.volume
    if vol == 0.0:
        return 0.0
    pts = rng.uniform(box.lower, box.upper, size=(samples, z.n))
    hits = sum(is_member(z, p) for p in pts)
    return vol * hits / samples
