"""Release mechanisms for the public state.

The optimal filter draws a random seed box around the true public state and
then solves a small LP that grows the seed into the released set, minimising
how much the release lets the adversary shrink its private-state box.  Two
baselines are provided: a static grid quantizer and additive truncated
Gaussian noise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import ccg as _ccg
from .inference import (
    AdversaryBelief,
    StepReport,
    attack_step,
    init_belief,
    predict,
)
from .intervals import DimensionError, Interval, hull, minkowski_sum, psi_apply
from .lp import LpProblem, LpSolution, LpStatus, dump, solve
from .system import LinearSystem

__all__ = [
    "FilterError",
    "PreconditionViolation",
    "CoverMiss",
    "FilterState",
    "ReleaseRecord",
    "make_seed_set",
    "build_p2",
    "filter_step",
    "filter_step_k0",
    "QuantizerGrid",
    "reachable_cover",
    "quantizer_release",
    "truncated_gaussian_sample",
    "truncated_gaussian_release",
    "OptimalMechanism",
    "QuantizerMechanism",
    "GaussianMechanism",
    "make_mechanism",
    "MECHANISMS",
]

# slack for the "true state lies in the prediction" precondition
CONTAIN_TOL = 1e-9


class FilterError(RuntimeError):
    """The release LP failed where it should not; carries the problem listing."""

    def __init__(self, message: str, listing: str = ""):
        self.listing = listing
        super().__init__(message)


class PreconditionViolation(ValueError):
    pass


class CoverMiss(ValueError):
    """The point to quantize lies outside the grid cover."""


@dataclass(frozen=True, eq=False)
class FilterState:
    """The filter's copy of the adversary belief plus its budget and randomness.

    ``belief`` is ``None`` until the first release.
    """

    belief: AdversaryBelief | None
    eps_x: float
    rng: np.random.Generator

    @property
    def k(self) -> int:
        return -1 if self.belief is None else self.belief.k


@dataclass(frozen=True, eq=False)
class ReleaseRecord:
    k: int
    m_star: Interval
    s_seed: Interval
    eps_y_star: float
    lp_status: LpStatus | None
    alpha: float
    beta: float
    report: StepReport | None = None


# -- seed set ----------------------------------------------------------------


def _seed_ratio(eps_x: float, dist: float, rng) -> float:
    u = rng.uniform()
    return 0.0 if dist == 0.0 else u * min(1.0, eps_x / (2.0 * dist))


def make_seed_set(x_k, x_pred: Interval, eps_x: float, rng, return_ratios: bool = False):
    """Random box ``[x - a (x - lo), x + b (hi - x)]`` around the true state.

    ``a`` and ``b`` are uniform on ``[0, min(1, eps_x / (2 d))]`` where ``d`` is the
    1-norm distance to the lower (upper) corner of ``x_pred``, so the seed holds
    ``x_k``, stays in ``x_pred`` and has total width at most ``eps_x``.  Both
    uniforms are drawn even when a distance is zero, keeping the stream aligned.
    """
    if eps_x <= 0:
        raise ValueError("eps_x must be positive")
    x = np.asarray(x_k, dtype=float).reshape(-1)
    if not x_pred.contains(x, tol=CONTAIN_TOL):
        raise PreconditionViolation("true public state lies outside the predicted box")
    x = np.clip(x, x_pred.lower, x_pred.upper)
    below = x - x_pred.lower
    above = x_pred.upper - x
    alpha = _seed_ratio(eps_x, float(below.sum()), rng)
    beta = _seed_ratio(eps_x, float(above.sum()), rng)
    seed = Interval(x - alpha * below, x + beta * above)
    return (seed, alpha, beta) if return_ratios else seed


# -- the release LP ----------------------------------------------------------


def _backward_affine(p_inv, fixed_terms):
    """Backward bounds ``L = P+ lo + P- hi + c_lo`` and ``U = P- lo + P+ hi + c_hi``."""
    pos = np.maximum(p_inv, 0.0)
    neg = np.minimum(p_inv, 0.0)
    const = minkowski_sum(*(psi_apply(a, box) for a, box in fixed_terms))
    return pos, neg, const.lower, const.upper


def build_p2(fs: FilterState, sys: LinearSystem, s_seed: Interval, x_pred: Interval | None = None) -> LpProblem:
    """LP whose optimum is the smallest one-step leak any admissible release can cause.

    Variables are ``[eps_y, m_lo, m_hi, dx, dy]`` where ``dx``/``dy`` bound the
    radius each calibration intersection removes from the previous public and
    private boxes.  The leak row carries the factor 2 that turns radii into
    widths, so ``eps_y`` is directly comparable with the realised leak.
    """
    belief = fs.belief
    if belief is None:
        raise ValueError("the release LP needs a belief from a previous step")
    if x_pred is None:
        x_pred, _ = predict(belief, sys)
    n = x_pred.n
    if s_seed.n != n:
        raise DimensionError(f"seed has dimension {s_seed.n}, prediction has {n}")
    X, Y, W = belief.x_post, belief.y_post, sys.wx_bounds
    a1i, a2i = sys.a1_inv, sys.a2_inv

    nv = 1 + 4 * n
    i_eps = 0
    lo = slice(1, 1 + n)
    hi = slice(1 + n, 1 + 2 * n)
    dsl = {"x": slice(1 + 2 * n, 1 + 3 * n), "y": slice(1 + 3 * n, 1 + 4 * n)}

    rows, rhs = [], []

    row = np.zeros(nv)
    row[i_eps] = -1.0
    row[dsl["x"]] = 2.0 * np.abs(sys.a3).sum(axis=0)
    row[dsl["y"]] = 2.0 * np.abs(sys.a4).sum(axis=0)
    rows.append(row)
    rhs.append(0.0)

    row = np.zeros(nv)
    row[lo] = -1.0
    row[hi] = 1.0
    rows.append(row)
    rhs.append(fs.eps_x)

    blocks = {
        "x": (a1i, [(-a1i @ sys.a2, Y), (-a1i @ sys.b1, W)], X),
        "y": (a2i, [(-a2i @ sys.a1, X), (-a2i @ sys.b1, W)], Y),
    }
    for z, (p_inv, fixed, prior) in blocks.items():
        pos, neg, c_lo, c_hi = _backward_affine(p_inv, fixed)
        absp = pos - neg
        d = dsl[z]
        for i in range(n):
            # radius drop at least prior radius minus backward radius
            row = np.zeros(nv)
            row[d.start + i] = -1.0
            row[lo] = 0.5 * absp[i]
            row[hi] = -0.5 * absp[i]
            rows.append(row)
            rhs.append(-prior.radius[i] + 0.5 * (c_hi[i] - c_lo[i]))
            # twice the drop covers the cut at the upper face
            row = np.zeros(nv)
            row[d.start + i] = -2.0
            row[lo] = -neg[i]
            row[hi] = -pos[i]
            rows.append(row)
            rhs.append(-prior.upper[i] + c_hi[i])
            # ... and at the lower face
            row = np.zeros(nv)
            row[d.start + i] = -2.0
            row[lo] = pos[i]
            row[hi] = neg[i]
            rows.append(row)
            rhs.append(prior.lower[i] - c_lo[i])

    lower = np.zeros(nv)
    upper = np.full(nv, np.inf)
    lower[lo], upper[lo] = x_pred.lower, s_seed.lower
    lower[hi], upper[hi] = s_seed.upper, x_pred.upper

    names = ["eps_y"]
    names += [f"m_lo[{i}]" for i in range(n)] + [f"m_hi[{i}]" for i in range(n)]
    names += [f"dx[{i}]" for i in range(n)] + [f"dy[{i}]" for i in range(n)]
    objective = np.zeros(nv)
    objective[i_eps] = 1.0
    return LpProblem(objective, a_ub=np.array(rows), b_ub=np.array(rhs),
                     lower=lower, upper=upper, names=names)


def _solve_release(p: LpProblem) -> LpSolution:
    sol = solve(p, method="simplex")
    if sol.status is LpStatus.NUMERICAL:
        sol = solve(p, method="highs")
    if not sol.optimal:
        raise FilterError(f"release LP ended with status {sol.status.value}: {sol.message}", dump(p))
    return sol


def filter_step(fs: FilterState, sys: LinearSystem, x_k) -> tuple[FilterState, ReleaseRecord]:
    """Release ``M*`` for the current step and advance the mirrored belief."""
    if fs.belief is None:
        raise ValueError("call filter_step_k0 for the first release")
    x_pred, _ = predict(fs.belief, sys)
    seed, alpha, beta = make_seed_set(x_k, x_pred, fs.eps_x, fs.rng, return_ratios=True)
    problem = build_p2(fs, sys, seed, x_pred)
    sol = _solve_release(problem)
    n = x_pred.n
    # snap onto the variable bounds so containment holds exactly
    m_lo = np.clip(sol.values[1:1 + n], x_pred.lower, seed.lower)
    m_hi = np.clip(sol.values[1 + n:1 + 2 * n], seed.upper, x_pred.upper)
    m_star = Interval(m_lo, m_hi)
    belief, report = attack_step(fs.belief, sys, m_star, strict=True)
    record = ReleaseRecord(belief.k, m_star, seed, float(sol.values[0]), sol.status, alpha, beta, report)
    return replace(fs, belief=belief), record


def filter_step_k0(fs: FilterState, sys: LinearSystem, x_0) -> tuple[FilterState, ReleaseRecord]:
    """First release: the seed widened evenly to use the whole budget, kept inside the prior."""
    prior = sys.x0_bounds
    seed, alpha, beta = make_seed_set(x_0, prior, fs.eps_x, fs.rng, return_ratios=True)
    pad = max(fs.eps_x - seed.surrogate_volume, 0.0) / (2 * prior.n)
    lower = np.maximum(seed.lower - pad, prior.lower)
    upper = np.minimum(seed.upper + pad, prior.upper)
    m_star = Interval(lower, upper)
    belief = init_belief(sys, m_star)
    record = ReleaseRecord(0, m_star, seed, 0.0, None, alpha, beta, None)
    return replace(fs, belief=belief), record


# -- static quantizer ---------------------------------------------------------


def reachable_cover(sys: LinearSystem, horizon: int = 60) -> Interval:
    """Box hull of every public state reachable within ``horizon`` steps.

    The joint state is propagated as an unconstrained zonotope, which avoids
    the wrapping blow-up of box-by-box prediction.
    """
    nx = sys.nx
    big_a = np.block([[sys.a1, sys.a2], [sys.a3, sys.a4]])
    big_b = np.block([
        [sys.b1, np.zeros((nx, sys.b2.shape[1]))],
        [np.zeros((sys.ny, sys.b1.shape[1])), sys.b2],
    ])
    box0 = Interval(np.concatenate([sys.x0_bounds.lower, sys.y0_bounds.lower]),
                    np.concatenate([sys.x0_bounds.upper, sys.y0_bounds.upper]))
    wbox = Interval(np.concatenate([sys.wx_bounds.lower, sys.wy_bounds.lower]),
                    np.concatenate([sys.wx_bounds.upper, sys.wy_bounds.upper]))
    w = _ccg.linear_map(big_b, _ccg.from_interval(wbox))
    z = _ccg.from_interval(box0)
    boxes = [sys.x0_bounds]
    for _ in range(horizon):
        z = _ccg.minkowski_sum(_ccg.linear_map(big_a, z), w)
        r = np.abs(z.G[:nx]).sum(axis=1)
        boxes.append(Interval(z.c[:nx] - r, z.c[:nx] + r))
    return hull(boxes)


@dataclass(frozen=True, eq=False)
class QuantizerGrid:
    """Uniform grid anchored at the lower corner of ``cover``; bins are half-open."""

    cover: Interval
    width: np.ndarray

    @classmethod
    def for_budget(cls, cover: Interval, eps_x: float) -> "QuantizerGrid":
        if eps_x <= 0:
            raise ValueError("eps_x must be positive")
        return cls(cover, np.full(cover.n, eps_x / cover.n))

    def index(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if not self.cover.contains(x):
            raise CoverMiss(f"point {x} lies outside the quantizer cover {self.cover}")
        origin, w = self.cover.lower, self.width
        idx = np.floor((x - origin) / w)
        # repair floor() rounding next to bin edges
        idx = np.where(origin + (idx + 1) * w <= x, idx + 1, idx)
        idx = np.where(origin + idx * w > x, idx - 1, idx)
        return idx.astype(np.int64)

    def bin(self, idx) -> Interval:
        idx = np.asarray(idx, dtype=float)
        lower = self.cover.lower + idx * self.width
        return Interval(lower, lower + self.width)


def quantizer_release(x_k, grid: QuantizerGrid) -> Interval:
    return grid.bin(grid.index(x_k))


# -- truncated Gaussian -------------------------------------------------------


def truncated_gaussian_sample(eps_x: float, size: int, rng) -> np.ndarray:
    """Draws from ``N(0, eps_x**2)`` conditioned on ``|v| <= eps_x / 2`` by rejection."""
    if eps_x <= 0:
        raise ValueError("eps_x must be positive")
    out = np.empty(size)
    filled = 0
    half = eps_x / 2
    while filled < size:
        v = rng.normal(0.0, eps_x, size=max(size - filled, 1))
        v = v[np.abs(v) <= half][: size - filled]
        out[filled:filled + v.size] = v
        filled += v.size
    return out


def truncated_gaussian_release(x_k, eps_x: float, rng) -> Interval:
    x = np.asarray(x_k, dtype=float).reshape(-1)
    n = x.size
    z = x + truncated_gaussian_sample(eps_x, n, rng)
    half = eps_x / (2 * n)
    return Interval(z - half, z + half)


# -- mechanism wrappers used by the experiment drivers -----------------------


class OptimalMechanism:
    """Randomised seed followed by the leak-minimising LP."""

    name = "optimal"
    strict = True

    def __init__(self, sys: LinearSystem, eps_x: float, rng, horizon: int = 60):
        self.sys = sys
        self.state = FilterState(None, float(eps_x), rng)
        self.records: list[ReleaseRecord] = []

    def release(self, k: int, x_k, belief: AdversaryBelief | None) -> Interval:
        if k == 0:
            self.state, rec = filter_step_k0(self.state, self.sys, x_k)
        else:
            self.state, rec = filter_step(self.state, self.sys, x_k)
        self.records.append(rec)
        return rec.m_star


class QuantizerMechanism:
    name = "quantizer"
    strict = True

    def __init__(self, sys: LinearSystem, eps_x: float, rng=None, horizon: int = 60):
        self.grid = QuantizerGrid.for_budget(reachable_cover(sys, max(horizon, 60)), eps_x)

    def release(self, k: int, x_k, belief=None) -> Interval:
        return quantizer_release(x_k, self.grid)


class GaussianMechanism:
    """Noisy centre with a fixed-width box; the release may miss the true state."""

    name = "gaussian"
    strict = False

    def __init__(self, sys: LinearSystem, eps_x: float, rng, horizon: int = 60):
        self.eps_x = float(eps_x)
        self.rng = rng

    def release(self, k: int, x_k, belief=None) -> Interval:
        return truncated_gaussian_release(x_k, self.eps_x, self.rng)


MECHANISMS = {
    "optimal": OptimalMechanism,
    "quantizer": QuantizerMechanism,
    "gaussian": GaussianMechanism,
}


def make_mechanism(name: str, sys: LinearSystem, eps_x: float, rng, horizon: int = 60):
    try:
        cls = MECHANISMS[name]
    except KeyError:
        raise ValueError(f"unknown mechanism {name!r}; choose from {sorted(MECHANISMS)}") from None
    return cls(sys, eps_x, rng, horizon)
