"""The adversary's set-membership inference attack and the privacy audits.

Each step has a backward calibration (what the new observation says about
the previous public and private state) followed by a forward pass that
yields the posterior boxes.  Per step, for observation set ``M`` at time k:

    Mx_back = A1^-1 M  +  (-A1^-1 A2) Y_{k-1|k-1}  +  (-A1^-1 B1) Wx
    My_back = A2^-1 M  +  (-A2^-1 A1) X_{k-1|k-1}  +  (-A2^-1 B1) Wx
    X_{k-1|k} = Mx_back & X_{k-1|k-1}
    Y_{k-1|k} = My_back & Y_{k-1|k-1}
    X_{k|k}   = M & (A1 X_{k-1|k} + A2 Y_{k-1|k} + B1 Wx)
    Y_{k|k}   = A3 X_{k-1|k} + A4 Y_{k-1|k} + B2 Wy

With boxes every image is the tightest interval (``psi_apply``); with CCGs
the recursion is exact but the sets grow every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ccg as _ccg
from .intervals import Interval, intersect, minkowski_sum, psi_apply
from .system import LinearSystem

__all__ = [
    "InconsistentObservation",
    "InvariantViolation",
    "HorizonCapExceeded",
    "AdversaryBelief",
    "StepSets",
    "StepReport",
    "Measures",
    "init_belief",
    "predict",
    "attack_step",
    "measures",
    "delta_set",
    "delta_radius",
    "uncertainty_reduction",
    "matrix_norm1",
    "private_radius_bound",
    "check_radius_bound",
    "check_reduction_bounds",
    "check_privacy_sandwich",
    "CcgBelief",
    "init_belief_ccg",
    "predict_ccg",
    "attack_step_ccg",
    "DEFAULT_CCG_CAP",
    "AUDIT_TOL",
]

AUDIT_TOL = 1e-9
DEFAULT_CCG_CAP = 8


class InconsistentObservation(RuntimeError):
    """An intersection in the attack recursion came out empty."""

    def __init__(self, k: int, equation: str):
        self.k = k
        self.equation = equation
        super().__init__(f"empty intersection at k={k} in {equation}")


class InvariantViolation(RuntimeError):
    """A property that holds by construction failed numerically."""


class HorizonCapExceeded(RuntimeError):
    """The exact CCG recursion was asked to run past its configured horizon."""


@dataclass(frozen=True, eq=False)
class AdversaryBelief:
    x_post: Interval
    y_post: Interval
    x_pred: Interval
    y_pred: Interval
    k: int
    # running elementwise max of the radii of every observation seen so far
    obs_radius_max: np.ndarray
    flags: frozenset = frozenset()

    @property
    def y_center_prev(self) -> np.ndarray:
        return self.y_pred.center


@dataclass(frozen=True, eq=False)
class StepSets:
    """Intermediate boxes of one attack step."""

    observation: Interval
    x_prior: Interval
    y_prior: Interval
    mx_back: Interval
    my_back: Interval
    x_cal: Interval
    y_cal: Interval
    mx_fwd: Interval


@dataclass(frozen=True)
class Measures:
    privacy_vol: float
    privacy_surrogate: float
    utility: float
    utility_surrogate: float


@dataclass(frozen=True, eq=False)
class StepReport:
    k: int
    privacy_vol: float
    privacy_surrogate: float
    utility: float
    utility_surrogate: float
    prior_surrogate: float
    leak_surrogate: float
    leak_via_shrinkage: float
    center_shift: float
    lower_bound: float
    upper_bound: float
    delta_x_surrogate: float
    delta_y_surrogate: float
    sets: StepSets
    discarded: bool = False
    bound_checks: dict = field(default_factory=dict)


def _images(terms) -> Interval:
    return minkowski_sum(*(psi_apply(mat, box) for mat, box in terms))


def init_belief(sys: LinearSystem, m0: Interval) -> AdversaryBelief:
    """Belief after the first release ``m0``; nothing is learnt about ``y``."""
    flags = set()
    if not m0.issubset(sys.x0_bounds):
        flags.add("m0_clamped")
    x_post = intersect(m0, sys.x0_bounds)
    if x_post is None:
        raise InconsistentObservation(0, "initial calibration of X_{0|0}")
    return AdversaryBelief(
        x_post=x_post,
        y_post=sys.y0_bounds,
        x_pred=sys.x0_bounds,
        y_pred=sys.y0_bounds,
        k=0,
        obs_radius_max=m0.radius.copy(),
        flags=frozenset(flags),
    )


def predict(belief: AdversaryBelief, sys: LinearSystem) -> tuple[Interval, Interval]:
    """One-step prior boxes ``(X_{k|k-1}, Y_{k|k-1})`` from the current posterior."""
    x_pred = _images(
        [(sys.a1, belief.x_post), (sys.a2, belief.y_post), (sys.b1, sys.wx_bounds)]
    )
    y_pred = _images(
        [(sys.a3, belief.x_post), (sys.a4, belief.y_post), (sys.b2, sys.wy_bounds)]
    )
    return x_pred, y_pred


def _calibrate(belief, sys, m):
    X, Y, W = belief.x_post, belief.y_post, sys.wx_bounds
    p, q = sys.a1_inv, sys.a2_inv
    mx_back = _images([(p, m), (-p @ sys.a2, Y), (-p @ sys.b1, W)])
    my_back = _images([(q, m), (-q @ sys.a1, X), (-q @ sys.b1, W)])
    k = belief.k + 1
    x_cal = intersect(mx_back, X)
    if x_cal is None:
        raise InconsistentObservation(k, "backward calibration X_{k-1|k}")
    y_cal = intersect(my_back, Y)
    if y_cal is None:
        raise InconsistentObservation(k, "backward calibration Y_{k-1|k}")
    mx_fwd = _images([(sys.a1, x_cal), (sys.a2, y_cal), (sys.b1, W)])
    x_post = intersect(m, mx_fwd)
    if x_post is None:
        raise InconsistentObservation(k, "posterior X_{k|k}")
    y_post = _images([(sys.a3, x_cal), (sys.a4, y_cal), (sys.b2, sys.wy_bounds)])
    sets = StepSets(m, X, Y, mx_back, my_back, x_cal, y_cal, mx_fwd)
    return x_post, y_post, sets


def attack_step(
    belief: AdversaryBelief,
    sys: LinearSystem,
    m: Interval,
    strict: bool = True,
) -> tuple[AdversaryBelief, StepReport]:
    """Consume the observation set ``m`` released at time ``belief.k + 1``.

    With ``strict=False`` an observation that contradicts the belief is
    discarded: the step is replayed with the uninformative observation
    ``X_{k|k-1}`` and the report is flagged.  The strict mode raises
    :class:`InconsistentObservation` instead.
    """
    x_pred, y_pred = predict(belief, sys)
    discarded = False
    try:
        x_post, y_post, sets = _calibrate(belief, sys, m)
    except InconsistentObservation:
        if strict:
            raise
        discarded = True
        m = x_pred
        x_post, y_post, sets = _calibrate(belief, sys, m)

    flags = {"observation_discarded"} if discarded else set()
    new = AdversaryBelief(
        x_post=x_post,
        y_post=y_post,
        x_pred=x_pred,
        y_pred=y_pred,
        k=belief.k + 1,
        obs_radius_max=np.maximum(belief.obs_radius_max, m.radius),
        flags=frozenset(flags),
    )
    report = _report(new, sys, sets, discarded)
    return new, report


def measures(belief: AdversaryBelief) -> Measures:
    """Privacy is the size of the private box, utility the inverse size of the public one."""
    vol_x = belief.x_post.volume
    sur_x = belief.x_post.surrogate_volume
    return Measures(
        privacy_vol=belief.y_post.volume,
        privacy_surrogate=belief.y_post.surrogate_volume,
        utility=np.inf if vol_x == 0.0 else 1.0 / vol_x,
        utility_surrogate=np.inf if sur_x == 0.0 else 1.0 / sur_x,
    )


def delta_set(prior: Interval, backward: Interval) -> Interval:
    """Signed shrinkage ``prior \\ (prior & backward)`` with its sign clamps.

    The lower entries are ``min(prior.lower - backward.lower, 0)`` and the upper
    ones ``max(prior.upper - backward.upper, 0)``, so the box always straddles 0.
    """
    lower = np.minimum(prior.lower - backward.lower, 0.0)
    upper = np.maximum(prior.upper - backward.upper, 0.0)
    return Interval(lower, upper)


def delta_radius(prior: Interval, backward: Interval) -> np.ndarray:
    """Radius lost by ``prior`` when intersected with ``backward``."""
    return delta_set(prior, backward).radius


def matrix_norm1(a) -> float:
    """Entrywise 1-norm, the sum of absolute entries."""
    return float(np.sum(np.abs(a)))


def uncertainty_reduction(
    y_pred: Interval,
    y_post: Interval,
    a3=None,
    a4=None,
    delta_x: Interval | None = None,
    delta_y: Interval | None = None,
) -> tuple[float, float]:
    """Surrogate leak ``Vol(y_pred) - Vol(y_post)`` evaluated two ways.

    The first value is the plain difference of total widths.  The second is
    the 1-norm of ``Psi(A3) dX + Psi(A4) dY`` built from the clamped
    shrinkage boxes; it is ``nan`` when the shrinkage boxes are not given.
    """
    if not y_post.issubset(y_pred, tol=AUDIT_TOL):
        raise InvariantViolation("posterior private box is not inside its prediction")
    direct = y_pred.surrogate_volume - y_post.surrogate_volume
    if delta_x is None or delta_y is None:
        return direct, float("nan")
    shrink = minkowski_sum(psi_apply(a3, delta_x), psi_apply(a4, delta_y))
    via_deltas = float(np.sum(np.abs(shrink.lower)) + np.sum(np.abs(shrink.upper)))
    return direct, via_deltas


def private_radius_bound(sys: LinearSystem, p_bar_x) -> np.ndarray:
    """Upper bound on the private-box radius given the largest observation radius."""
    abs_ = np.abs
    a2i = sys.a2_inv
    coeff = abs_(sys.a3) + abs_(sys.a4) @ abs_(a2i) + abs_(sys.a4) @ abs_(a2i @ sys.a1)
    return (
        coeff @ np.asarray(p_bar_x, dtype=float)
        + abs_(sys.a4) @ abs_(a2i @ sys.b1) @ sys.wx_bounds.radius
        + abs_(sys.b2) @ sys.wy_bounds.radius
    )


def check_radius_bound(belief: AdversaryBelief, sys: LinearSystem, p_bar_x=None) -> tuple[bool, float]:
    """Radius of ``Y_{k|k}`` against its observation-radius bound.

    Returns ``(ok, residual)`` where the residual is the largest excess of the
    radius over the bound (negative when there is slack).
    """
    if p_bar_x is None:
        p_bar_x = belief.obs_radius_max
    residual = float(np.max(belief.y_post.radius - private_radius_bound(sys, p_bar_x)))
    return residual <= AUDIT_TOL, residual


def check_reduction_bounds(step: StepReport) -> tuple[bool, bool, float, float]:
    """Leak between ``2 |c_post - c_pred|_1`` and the norm-weighted shrinkage.

    Returns ``(lower_ok, upper_ok, lower_residual, upper_residual)``; a
    residual is positive only when its bound is violated.
    """
    res_lo = step.lower_bound - step.leak_surrogate
    res_hi = step.leak_surrogate - step.upper_bound
    return res_lo <= AUDIT_TOL, res_hi <= AUDIT_TOL, res_lo, res_hi


def check_privacy_sandwich(step: StepReport, y_pred: Interval | None = None) -> tuple[bool, bool, float, float]:
    prior = step.prior_surrogate if y_pred is None else y_pred.surrogate_volume
    floor = prior - step.upper_bound
    ceiling = prior - step.lower_bound
    res_lo = floor - step.privacy_surrogate
    res_hi = step.privacy_surrogate - ceiling
    return res_lo <= AUDIT_TOL, res_hi <= AUDIT_TOL, res_lo, res_hi


def _report(belief: AdversaryBelief, sys: LinearSystem, sets: StepSets, discarded: bool) -> StepReport:
    meas = measures(belief)
    dx = delta_set(sets.x_prior, sets.mx_back)
    dy = delta_set(sets.y_prior, sets.my_back)
    leak, leak_shr = uncertainty_reduction(belief.y_pred, belief.y_post, sys.a3, sys.a4, dx, dy)
    shift = float(np.sum(np.abs(belief.y_post.center - belief.y_center_prev)))
    upper = matrix_norm1(sys.a3) * dx.surrogate_volume + matrix_norm1(sys.a4) * dy.surrogate_volume
    report = StepReport(
        k=belief.k,
        privacy_vol=meas.privacy_vol,
        privacy_surrogate=meas.privacy_surrogate,
        utility=meas.utility,
        utility_surrogate=meas.utility_surrogate,
        prior_surrogate=belief.y_pred.surrogate_volume,
        leak_surrogate=leak,
        leak_via_shrinkage=leak_shr,
        center_shift=shift,
        lower_bound=2.0 * shift,
        upper_bound=upper,
        delta_x_surrogate=dx.surrogate_volume,
        delta_y_surrogate=dy.surrogate_volume,
        sets=sets,
        discarded=discarded,
    )
    rb_ok, rb = check_radius_bound(belief, sys)
    t_lo_ok, t_hi_ok, t_lo, t_hi = check_reduction_bounds(report)
    s_lo_ok, s_hi_ok, s_lo, s_hi = check_privacy_sandwich(report)
    route_gap = abs(leak - leak_shr)
    report.bound_checks.update({
        "leak_routes": (route_gap <= AUDIT_TOL, route_gap),
        "radius_bound": (rb_ok, rb),
        "reduction_lower": (t_lo_ok, t_lo),
        "reduction_upper": (t_hi_ok, t_hi),
        "sandwich_lower": (s_lo_ok, s_lo),
        "sandwich_upper": (s_hi_ok, s_hi),
    })
    return report


# -- exact recursion with constrained zonotopes ------------------------------


@dataclass(frozen=True, eq=False)
class CcgBelief:
    x_post: _ccg.Ccg
    y_post: _ccg.Ccg
    k: int
    # (k, x_ng, x_nc, y_ng, y_nc) for every step so far
    counts: tuple = ()
    flags: frozenset = frozenset()


def _counts(k, x, y):
    return (k, x.ng, x.nc, y.ng, y.nc)


def _as_ccg(m):
    return _ccg.from_interval(m) if isinstance(m, Interval) else m


def init_belief_ccg(sys: LinearSystem, m0) -> CcgBelief:
    x0 = _ccg.intersect(_as_ccg(m0), _ccg.from_interval(sys.x0_bounds))
    y0 = _ccg.from_interval(sys.y0_bounds)
    return CcgBelief(x0, y0, 0, (_counts(0, x0, y0),))


def predict_ccg(belief: CcgBelief, sys: LinearSystem) -> tuple[_ccg.Ccg, _ccg.Ccg]:
    lm, ms = _ccg.linear_map, _ccg.minkowski_sum
    wx = _ccg.from_interval(sys.wx_bounds)
    wy = _ccg.from_interval(sys.wy_bounds)
    x_pred = ms(lm(sys.a1, belief.x_post), lm(sys.a2, belief.y_post), lm(sys.b1, wx))
    y_pred = ms(lm(sys.a3, belief.x_post), lm(sys.a4, belief.y_post), lm(sys.b2, wy))
    return x_pred, y_pred


def attack_step_ccg(
    belief: CcgBelief,
    sys: LinearSystem,
    m,
    cap: int = DEFAULT_CCG_CAP,
    strict: bool = True,
    check_empty: bool = False,
) -> CcgBelief:
    """Exact counterpart of :func:`attack_step` on constrained zonotopes.

    Emptiness costs an LP, so it is only tested when ``check_empty`` is set;
    an empty posterior then raises in strict mode and is replaced by the
    prediction otherwise.
    """
    k = belief.k + 1
    if k > cap:
        raise HorizonCapExceeded(f"step {k} is beyond the CCG horizon cap {cap}")
    lm, ms, cap_ = _ccg.linear_map, _ccg.minkowski_sum, _ccg.intersect
    m = _as_ccg(m)
    X, Y = belief.x_post, belief.y_post
    wx = _ccg.from_interval(sys.wx_bounds)
    wy = _ccg.from_interval(sys.wy_bounds)
    p, q = sys.a1_inv, sys.a2_inv

    mx_back = ms(lm(p, m), lm(-p @ sys.a2, Y), lm(-p @ sys.b1, wx))
    my_back = ms(lm(q, m), lm(-q @ sys.a1, X), lm(-q @ sys.b1, wx))
    x_cal = cap_(mx_back, X)
    y_cal = cap_(my_back, Y)
    mx_fwd = ms(lm(sys.a1, x_cal), lm(sys.a2, y_cal), lm(sys.b1, wx))
    x_post = cap_(m, mx_fwd)
    y_post = ms(lm(sys.a3, x_cal), lm(sys.a4, y_cal), lm(sys.b2, wy))

    flags = frozenset()
    # an empty X_{k|k} also covers empty calibration sets, which feed into it
    if check_empty and _ccg.is_empty(x_post):
        if strict:
            raise InconsistentObservation(k, "CCG posterior X_{k|k}")
        x_post, y_post = predict_ccg(belief, sys)
        flags = frozenset({"observation_discarded"})
    return CcgBelief(x_post, y_post, k, belief.counts + (_counts(k, x_post, y_post),), flags)
