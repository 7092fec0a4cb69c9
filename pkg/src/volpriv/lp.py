"""Small dense linear programs.

Problems are always in minimisation form::

    minimise    c @ v
    subject to  A_ub @ v <= b_ub
                A_eq @ v == b_eq
                lower <= v <= upper        (entries may be infinite)

The default solver is a dense two-phase tableau simplex with Bland's rule,
which is deterministic and never cycles.  ``method="highs"`` hands the same
problem to SciPy's HiGHS for the large constraint systems produced by
constrained-zonotope hulls.  Either way the returned point is re-checked
against the original constraints and an ``OPTIMAL`` status is only reported
when it passes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LpStatus",
    "LpProblem",
    "LpSolution",
    "solve",
    "check_feasible",
    "dump",
    "FEAS_TOL",
    "OPT_TOL",
]

FEAS_TOL = 1e-8
OPT_TOL = 1e-9
_PIVOT_TOL = 1e-11


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL = "numerical"


def _as_rows(a, n):
    if a is None:
        return np.zeros((0, n))
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros((0, n))
    return np.atleast_2d(a)


def _as_vec(b, m):
    if b is None:
        return np.zeros(m)
    return np.asarray(b, dtype=float).reshape(-1)


@dataclass
class LpProblem:
    objective: np.ndarray
    a_ub: np.ndarray = None
    b_ub: np.ndarray = None
    a_eq: np.ndarray = None
    b_eq: np.ndarray = None
    lower: np.ndarray = None
    upper: np.ndarray = None
    names: list = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        n = self.objective.size
        self.a_ub = _as_rows(self.a_ub, n)
        self.b_ub = _as_vec(self.b_ub, self.a_ub.shape[0])
        self.a_eq = _as_rows(self.a_eq, n)
        self.b_eq = _as_vec(self.b_eq, self.a_eq.shape[0])
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).reshape(-1).copy()
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).reshape(-1).copy()
        if self.names is None:
            self.names = [f"v{i}" for i in range(n)]
        self.validate()

    @property
    def n(self) -> int:
        return self.objective.size

    def validate(self) -> None:
        n = self.n
        if self.a_ub.shape[1] != n or self.a_eq.shape[1] != n:
            raise ValueError("constraint rows must have one coefficient per variable")
        if self.b_ub.size != self.a_ub.shape[0] or self.b_eq.size != self.a_eq.shape[0]:
            raise ValueError("right-hand sides do not match the number of rows")
        if self.lower.size != n or self.upper.size != n or len(self.names) != n:
            raise ValueError("bounds and names need one entry per variable")
        for arr in (self.objective, self.a_ub, self.b_ub, self.a_eq, self.b_eq, self.lower, self.upper):
            if np.isnan(arr).any():
                raise ValueError("NaN coefficient in linear program")
        for arr in (self.objective, self.a_ub, self.b_ub, self.a_eq, self.b_eq):
            if not np.isfinite(arr).all():
                raise ValueError("infinite coefficient in linear program")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise ValueError("variable bounds point the wrong way")


@dataclass
class LpSolution:
    status: LpStatus
    values: np.ndarray = field(default=None)
    objective_value: float = float("nan")
    message: str = ""
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def check_feasible(p: LpProblem, v, tol: float = FEAS_TOL) -> tuple[bool, float]:
    """Return ``(ok, worst_violation)`` for the point ``v``."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != p.n:
        raise ValueError(f"point has {v.size} entries, problem has {p.n} variables")
    worst = 0.0
    if p.a_ub.shape[0]:
        worst = max(worst, float(np.max(p.a_ub @ v - p.b_ub)))
    if p.a_eq.shape[0]:
        worst = max(worst, float(np.max(np.abs(p.a_eq @ v - p.b_eq))))
    finite_lo = np.isfinite(p.lower)
    finite_hi = np.isfinite(p.upper)
    if finite_lo.any():
        worst = max(worst, float(np.max(p.lower[finite_lo] - v[finite_lo])))
    if finite_hi.any():
        worst = max(worst, float(np.max(v[finite_hi] - p.upper[finite_hi])))
    worst = max(worst, 0.0)
    return worst <= tol, worst


def solve(p: LpProblem, method: str = "simplex", max_iter: int | None = None) -> LpSolution:
    if method == "simplex":
        sol = _solve_simplex(p, max_iter)
    elif method == "highs":
        sol = _solve_highs(p)
    else:
        raise ValueError(f"unknown LP method {method!r}")
    if sol.status is LpStatus.OPTIMAL:
        ok, worst = check_feasible(p, sol.values)
        if not ok:
            return LpSolution(
                LpStatus.NUMERICAL,
                sol.values,
                sol.objective_value,
                f"solver point violates constraints by {worst:.3e}",
                sol.iterations,
            )
    return sol


# -- dense two-phase simplex -------------------------------------------------


def _standard_form(p: LpProblem):
    """Rewrite as ``v = offset + T @ u`` with ``u >= 0``."""
    n = p.n
    cols = []
    offset = np.zeros(n)
    extra_ub = []  # (std column index, bound) for u_j <= hi - lo
    for j in range(n):
        lo, hi = p.lower[j], p.upper[j]
        if np.isfinite(lo):
            offset[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                extra_ub.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    T = np.zeros((n, len(cols)))
    for k, (j, s) in enumerate(cols):
        T[j, k] = s
    a_ub = p.a_ub @ T
    b_ub = p.b_ub - p.a_ub @ offset
    if extra_ub:
        rows = np.zeros((len(extra_ub), len(cols)))
        for r, (k, bound) in enumerate(extra_ub):
            rows[r, k] = 1.0
        a_ub = np.vstack([a_ub, rows])
        b_ub = np.concatenate([b_ub, [b for _, b in extra_ub]])
    a_eq = p.a_eq @ T
    b_eq = p.b_eq - p.a_eq @ offset
    c = p.objective @ T
    return c, a_ub, b_ub, a_eq, b_eq, T, offset


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    factors = tab[:, col].copy()
    factors[row] = 0.0
    tab -= np.outer(factors, tab[row])
    tab[:, col] = 0.0
    tab[row, col] = 1.0


def _iterate(tab, basis, cost, allowed, max_iter):
    """Bland's-rule primal simplex on a tableau already in canonical form."""
    m = tab.shape[0]
    its = 0
    while True:
        if its >= max_iter:
            return "iterations", its
        reduced = cost - cost[basis] @ tab[:, :-1]
        candidates = np.flatnonzero((reduced < -OPT_TOL) & allowed)
        if candidates.size == 0:
            return "optimal", its
        col = int(candidates[0])
        column = tab[:, col]
        positive = np.flatnonzero(column > _PIVOT_TOL)
        if positive.size == 0:
            return "unbounded", its
        ratios = tab[positive, -1] / column[positive]
        best = ratios.min()
        tied = positive[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = int(min(tied, key=lambda r: basis[r]))
        _pivot(tab, row, col)
        basis[row] = col
        its += 1
        if m == 0:
            return "optimal", its


def _solve_simplex(p: LpProblem, max_iter: int | None) -> LpSolution:
    c, a_ub, b_ub, a_eq, b_eq, T, offset = _standard_form(p)
    n_u = c.size
    m_ub, m_eq = a_ub.shape[0], a_eq.shape[0]
    m = m_ub + m_eq
    if max_iter is None:
        max_iter = 200 * (m + n_u + 10)

    # rows: [a_ub | I | art], [a_eq | 0 | art]
    a = np.zeros((m, n_u + m_ub))
    a[:m_ub, :n_u] = a_ub
    a[:m_ub, n_u:] = np.eye(m_ub)
    a[m_ub:, :n_u] = a_eq
    rhs = np.concatenate([b_ub, b_eq])
    flip = rhs < 0
    a[flip] *= -1
    rhs[flip] *= -1

    # a non-flipped <= row starts with its slack basic; every other row needs an artificial
    art_rows = [i for i in range(m) if i >= m_ub or flip[i]]
    n_main = n_u + m_ub
    n_art = len(art_rows)
    tab = np.zeros((m, n_main + n_art + 1))
    tab[:, :n_main] = a
    tab[:, -1] = rhs
    basis = n_u + np.arange(m)
    for k, i in enumerate(art_rows):
        tab[i, n_main + k] = 1.0
        basis[i] = n_main + k

    total_its = 0
    if n_art:
        cost1 = np.zeros(n_main + n_art)
        cost1[n_main:] = 1.0
        allowed = np.ones(n_main + n_art, dtype=bool)
        state, its = _iterate(tab, basis, cost1, allowed, max_iter)
        total_its += its
        if state != "optimal":
            return LpSolution(LpStatus.NUMERICAL, message=f"phase 1 stopped: {state}", iterations=total_its)
        infeas = float(cost1[basis] @ tab[:, -1])
        scale = max(1.0, float(np.max(np.abs(rhs))) if rhs.size else 1.0)
        if infeas > FEAS_TOL * scale:
            return LpSolution(LpStatus.INFEASIBLE, message=f"phase 1 residual {infeas:.3e}", iterations=total_its)
        # drive artificials out of the basis, dropping redundant rows
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n_main:
                row = tab[i, :n_main]
                nz = np.flatnonzero(np.abs(row) > 1e-9)
                if nz.size:
                    _pivot(tab, i, int(nz[0]))
                    basis[i] = int(nz[0])
                else:
                    keep[i] = False
        tab = np.ascontiguousarray(tab[keep][:, list(range(n_main)) + [-1]])
        basis = basis[keep]

    cost2 = np.zeros(n_main)
    cost2[:n_u] = c
    allowed = np.ones(n_main, dtype=bool)
    state, its = _iterate(tab, basis, cost2, allowed, max_iter)
    total_its += its
    if state == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, message="objective unbounded below", iterations=total_its)
    if state != "optimal":
        return LpSolution(LpStatus.NUMERICAL, message=f"phase 2 stopped: {state}", iterations=total_its)

    u = np.zeros(n_main)
    u[basis] = tab[:, -1]
    v = offset + T @ u[:n_u]
    return LpSolution(LpStatus.OPTIMAL, v, float(p.objective @ v), "", total_its)


# -- HiGHS backend -----------------------------------------------------------


def _solve_highs(p: LpProblem) -> LpSolution:
    from scipy.optimize import linprog

    bounds = [
        (None if not np.isfinite(lo) else lo, None if not np.isfinite(hi) else hi)
        for lo, hi in zip(p.lower, p.upper)
    ]
    res = linprog(
        p.objective,
        A_ub=p.a_ub if p.a_ub.shape[0] else None,
        b_ub=p.b_ub if p.a_ub.shape[0] else None,
        A_eq=p.a_eq if p.a_eq.shape[0] else None,
        b_eq=p.b_eq if p.a_eq.shape[0] else None,
        bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    status = {0: LpStatus.OPTIMAL, 2: LpStatus.INFEASIBLE, 3: LpStatus.UNBOUNDED}.get(res.status, LpStatus.NUMERICAL)
    if status is LpStatus.OPTIMAL:
        return LpSolution(status, np.asarray(res.x, dtype=float), float(res.fun), res.message, int(res.nit))
    return LpSolution(status, message=res.message, iterations=int(getattr(res, "nit", 0)))


def dump(p: LpProblem) -> str:
    """Human-readable listing, one constraint per line."""

    def term_list(row):
        parts = []
        for coef, name in zip(row, p.names):
            if coef != 0.0:
                parts.append(f"{coef:+.9g}*{name}")
        return " ".join(parts) if parts else "0"

    lines = [f"minimize {term_list(p.objective)}", "subject to"]
    for i, (row, rhs) in enumerate(zip(p.a_ub, p.b_ub)):
        lines.append(f"  ub{i}: {term_list(row)} <= {rhs:.9g}")
    for i, (row, rhs) in enumerate(zip(p.a_eq, p.b_eq)):
        lines.append(f"  eq{i}: {term_list(row)} == {rhs:.9g}")
    lines.append("bounds")
    for name, lo, hi in zip(p.names, p.lower, p.upper):
        lines.append(f"  {lo:.9g} <= {name} <= {hi:.9g}")
    return "\n".join(lines) + "\n"
