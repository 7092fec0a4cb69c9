"""Experiment drivers: time series, privacy/utility sweeps, bound audits.

Every driver returns a :class:`Table`; :func:`write_csv` serialises it with
a schema comment line, a header row and floats at 9 significant digits.
Random streams are keyed by ``(seed, (run, 0))`` for the trajectory and
``(seed, (run, 1))`` for the mechanism, so every mechanism and budget sees
the same trajectories.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ccg as _ccg
from .config import ConfigError, ExperimentConfig
from .filters import FilterState, build_p2, filter_step, filter_step_k0, make_mechanism, make_seed_set
from .inference import (
    AUDIT_TOL,
    InconsistentObservation,
    InvariantViolation,
    attack_step,
    attack_step_ccg,
    init_belief,
    init_belief_ccg,
    predict,
)
from .intervals import Interval
from .lp import dump
from .system import LinearSystem, Trajectory, make_rng, simulate

__all__ = [
    "Table",
    "StepRecord",
    "Episode",
    "run_episode",
    "run_timeseries",
    "run_tradeoff",
    "run_bound_audit",
    "lp_dump",
    "write_csv",
    "to_csv_text",
    "CHECK_NAMES",
    "TRADEOFF_MECHANISMS",
]

CHECK_NAMES = (
    "leak_routes",
    "radius_bound",
    "reduction_lower",
    "reduction_upper",
    "sandwich_lower",
    "sandwich_upper",
)
# the Gaussian sweep comes first because it anchors the normalisation
TRADEOFF_MECHANISMS = ("gaussian", "optimal", "quantizer")


@dataclass
class Table:
    schema: str
    columns: list
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return "nan"
        return format(float(v), ".9g")
    return str(v)


def to_csv_text(table: Table) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {table.schema}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(table: Table, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_csv_text(table))
    return path


# -- one episode ---------------------------------------------------------------


@dataclass(eq=False)
class StepRecord:
    k: int
    x_true: np.ndarray
    y_true: np.ndarray
    release: Interval
    belief: object
    report: object = None
    discarded: bool = False
    ccg_y_hull: Interval | None = None
    ccg_x_hull: Interval | None = None

    @property
    def x_sound(self) -> bool:
        return self.belief.x_post.contains(self.x_true, tol=AUDIT_TOL)

    @property
    def y_sound(self) -> bool:
        return self.belief.y_post.contains(self.y_true, tol=AUDIT_TOL)

    @property
    def y_nested(self) -> bool:
        return self.belief.y_post.issubset(self.belief.y_pred, tol=AUDIT_TOL)


@dataclass(eq=False)
class Episode:
    mechanism: str
    eps_x: float
    steps: list
    ccg_counts: tuple = ()

    def privacy(self, measure: str = "surrogate", backend: str = "interval") -> np.ndarray:
        """Per-step privacy for k >= 1 (``measure`` is ``"surrogate"`` or ``"vol"``)."""
        if backend == "ccg":
            boxes = [s.ccg_y_hull for s in self.steps[1:] if s.ccg_y_hull is not None]
        else:
            boxes = [s.belief.y_post for s in self.steps[1:]]
        return np.array([b.surrogate_volume if measure == "surrogate" else b.volume for b in boxes])

    def utility(self, measure: str = "surrogate", backend: str = "interval") -> np.ndarray:
        if backend == "ccg":
            boxes = [s.ccg_x_hull for s in self.steps[1:] if s.ccg_x_hull is not None]
        else:
            boxes = [s.belief.x_post for s in self.steps[1:]]
        size = [b.surrogate_volume if measure == "surrogate" else b.volume for b in boxes]
        return np.array([np.inf if v == 0 else 1.0 / v for v in size])


def _same_belief(a, b) -> bool:
    return (a.k == b.k and a.x_post == b.x_post and a.y_post == b.y_post
            and a.x_pred == b.x_pred and a.y_pred == b.y_pred)


def run_episode(
    sys: LinearSystem,
    traj: Trajectory,
    mechanism: str,
    eps_x: float,
    rng: np.random.Generator,
    backend: str = "interval",
    ccg_cap: int = 8,
) -> Episode:
    """Release, attack and record every step of one trajectory.

    With ``backend="ccg"`` the exact recursion runs alongside the interval one
    on the same releases for ``min(horizon, ccg_cap)`` steps.
    """
    horizon = traj.horizon
    mech = make_mechanism(mechanism, sys, eps_x, rng, horizon)
    ccg_steps = min(horizon, ccg_cap) if backend == "ccg" else 0

    m0 = mech.release(0, traj.xs[0], None)
    discarded = False
    try:
        belief = init_belief(sys, m0)
    except InconsistentObservation:
        if mech.strict:
            raise
        discarded = True
        m0 = sys.x0_bounds
        belief = init_belief(sys, m0)
    steps = [StepRecord(0, traj.xs[0], traj.ys[0], m0, belief, None, discarded)]

    cbel = None
    if ccg_steps:
        cbel = init_belief_ccg(sys, m0)
        steps[0].ccg_y_hull = _ccg.interval_hull(cbel.y_post)
        steps[0].ccg_x_hull = _ccg.interval_hull(cbel.x_post)

    for k in range(1, horizon + 1):
        m = mech.release(k, traj.xs[k], belief)
        belief, report = attack_step(belief, sys, m, strict=mech.strict)
        if mechanism == "optimal" and not _same_belief(belief, mech.state.belief):
            raise InvariantViolation(f"filter mirror diverged from the adversary at k={k}")
        rec = StepRecord(k, traj.xs[k], traj.ys[k], m, belief, report, report.discarded)
        if cbel is not None and k <= ccg_steps:
            observed = report.sets.observation
            cbel = attack_step_ccg(cbel, sys, observed, cap=ccg_cap,
                                   strict=mech.strict, check_empty=not mech.strict)
            rec.ccg_y_hull = _ccg.interval_hull(cbel.y_post)
            rec.ccg_x_hull = _ccg.interval_hull(cbel.x_post)
        steps.append(rec)
    return Episode(mechanism, float(eps_x), steps, cbel.counts if cbel is not None else ())


def _trajectory(sys, cfg: ExperimentConfig, run: int) -> Trajectory:
    return simulate(sys, cfg.horizon, make_rng(cfg.seed, (run, 0)))


def _episode(sys, cfg, mechanism, eps, run, traj=None) -> Episode:
    traj = traj if traj is not None else _trajectory(sys, cfg, run)
    return run_episode(sys, traj, mechanism, eps, make_rng(cfg.seed, (run, 1)),
                       backend=cfg.backend, ccg_cap=cfg.ccg_cap)


# -- drivers -------------------------------------------------------------------


def _vec_cols(prefix: str, n: int) -> list:
    return [f"{prefix}{i}" for i in range(n)]


def run_timeseries(cfg: ExperimentConfig, sys: LinearSystem | None = None) -> Table:
    """Per-step rows for every (budget, run) under ``cfg.mechanism``."""
    cfg.validate()
    sys = sys or cfg.load_system()
    nx, ny = sys.nx, sys.ny
    cols = ["mechanism", "eps_x", "run", "k"]
    cols += _vec_cols("x_true_", nx) + _vec_cols("y_true_", ny)
    cols += _vec_cols("m_lo_", nx) + _vec_cols("m_hi_", nx)
    cols += _vec_cols("x_lo_", nx) + _vec_cols("x_hi_", nx)
    cols += _vec_cols("y_lo_", ny) + _vec_cols("y_hi_", ny)
    cols += _vec_cols("x_est_", nx) + _vec_cols("y_est_", ny)
    cols += ["x_est_err", "y_est_err", "privacy_vol", "privacy_surrogate", "utility",
             "utility_surrogate", "leak", "center_shift", "x_sound", "y_sound", "y_nested",
             "discarded"]
    cols += [f"res_{c}" for c in CHECK_NAMES]
    if cfg.backend == "ccg":
        cols += ["ccg_privacy_vol", "ccg_privacy_surrogate"]
    table = Table(
        "timeseries v1; estimates are box centres; errors are 1-norm distances to the true state",
        cols,
    )
    for eps in cfg.eps_x:
        for run in range(cfg.runs):
            ep = _episode(sys, cfg, cfg.mechanism, eps, run)
            for s in ep.steps:
                b = s.belief
                x_est, y_est = b.x_post.center, b.y_post.center
                xv, xs = b.x_post.volume, b.x_post.surrogate_volume
                row = [cfg.mechanism, float(eps), run, s.k]
                row += list(s.x_true) + list(s.y_true)
                row += list(s.release.lower) + list(s.release.upper)
                row += list(b.x_post.lower) + list(b.x_post.upper)
                row += list(b.y_post.lower) + list(b.y_post.upper)
                row += list(x_est) + list(y_est)
                row += [
                    float(np.abs(x_est - s.x_true).sum()),
                    float(np.abs(y_est - s.y_true).sum()),
                    b.y_post.volume,
                    b.y_post.surrogate_volume,
                    math.inf if xv == 0 else 1.0 / xv,
                    math.inf if xs == 0 else 1.0 / xs,
                ]
                r = s.report
                row += [r.leak_surrogate if r else 0.0, r.center_shift if r else 0.0]
                row += [s.x_sound, s.y_sound, s.y_nested, s.discarded]
                row += [r.bound_checks[c][1] if r else math.nan for c in CHECK_NAMES]
                if cfg.backend == "ccg":
                    h = s.ccg_y_hull
                    row += [h.volume, h.surrogate_volume] if h is not None else [math.nan, math.nan]
                table.rows.append(row)
    return table


def _mean_se(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return float(v.mean()), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def run_tradeoff(cfg: ExperimentConfig, sys: LinearSystem | None = None,
                 mechanisms=TRADEOFF_MECHANISMS) -> Table:
    """Time-and-run averaged privacy and utility for each (mechanism, budget).

    Normalised columns use the min and max of the Gaussian sweep for every
    mechanism, so other mechanisms may fall outside [0, 1].
    """
    cfg.validate()
    if len(cfg.eps_x) < 3:
        raise ConfigError(["eps_x: the trade-off sweep needs at least 3 budgets"])
    if "gaussian" not in mechanisms:
        raise ValueError("the Gaussian sweep is needed to anchor the normalisation")
    sys = sys or cfg.load_system()
    trajs = [_trajectory(sys, cfg, run) for run in range(cfg.runs)]
    backend = cfg.backend
    raw = []
    for mech in mechanisms:
        for eps in cfg.eps_x:
            per_run = {"ps": [], "pv": [], "us": [], "uv": []}
            for run in range(cfg.runs):
                ep = _episode(sys, cfg, mech, eps, run, trajs[run])
                per_run["ps"].append(ep.privacy("surrogate", backend).mean())
                per_run["pv"].append(ep.privacy("vol", backend).mean())
                per_run["us"].append(ep.utility("surrogate", backend).mean())
                per_run["uv"].append(ep.utility("vol", backend).mean())
            stats = {key: _mean_se(vals) for key, vals in per_run.items()}
            raw.append((mech, float(eps), stats))

    anchor = [s for m, _, s in raw if m == "gaussian"]

    def scaler(key):
        vals = [s[key][0] for s in anchor]
        lo, hi = min(vals), max(vals)
        span = hi - lo
        return lambda v: (v - lo) / span if span > 0 else 0.0

    norm_p, norm_u = scaler("ps"), scaler("us")
    cols = ["mechanism", "backend", "eps_x", "runs", "privacy_surrogate", "privacy_surrogate_se",
            "privacy_vol", "privacy_vol_se", "utility_surrogate", "utility_surrogate_se",
            "utility_vol", "utility_vol_se", "norm_privacy", "norm_utility"]
    table = Table(
        "tradeoff v1; privacy = mean surrogate volume of the private box over k>=1; "
        "normalisation uses the gaussian sweep min/max for all mechanisms",
        cols,
    )
    for mech, eps, s in raw:
        table.rows.append([
            mech, backend, eps, cfg.runs,
            *s["ps"], *s["pv"], *s["us"], *s["uv"],
            norm_p(s["ps"][0]), norm_u(s["us"][0]),
        ])
    return table


def run_bound_audit(cfg: ExperimentConfig, sys: LinearSystem | None = None) -> Table:
    """Residuals of every bound check per step, with violation counts in ``summary``."""
    cfg.validate()
    sys = sys or cfg.load_system()
    cols = ["mechanism", "eps_x", "run", "k"]
    for c in CHECK_NAMES:
        cols += [f"ok_{c}", f"res_{c}"]
    cols += ["x_sound", "y_sound", "y_nested", "discarded"]
    table = Table("audit v1; residual > 0 means the bound is violated; slack 1e-9", cols)
    violations = {c: 0 for c in CHECK_NAMES}
    soundness = {"x_sound": 0, "y_sound": 0, "y_nested": 0}
    steps = 0
    for eps in cfg.eps_x:
        for run in range(cfg.runs):
            ep = _episode(sys, cfg, cfg.mechanism, eps, run)
            for s in ep.steps[1:]:
                steps += 1
                row = [cfg.mechanism, float(eps), run, s.k]
                for c in CHECK_NAMES:
                    ok, res = s.report.bound_checks[c]
                    violations[c] += not ok
                    row += [ok, res]
                flags = {"x_sound": s.x_sound, "y_sound": s.y_sound, "y_nested": s.y_nested}
                for key, val in flags.items():
                    soundness[key] += not val
                row += [flags["x_sound"], flags["y_sound"], flags["y_nested"], s.discarded]
                table.rows.append(row)
    table.summary = {"steps": steps, "violations": violations, "soundness_failures": soundness}
    return table


def lp_dump(cfg: ExperimentConfig, sys: LinearSystem | None = None, step: int = 1) -> str:
    """Text listing of the release LP built at ``step`` of run 0 with the first budget."""
    cfg.validate()
    if step < 1 or step > cfg.horizon:
        raise ValueError(f"step must lie in 1..{cfg.horizon}")
    sys = sys or cfg.load_system()
    traj = _trajectory(sys, cfg, 0)
    fs = FilterState(None, float(cfg.eps_x[0]), make_rng(cfg.seed, (0, 1)))
    fs, _ = filter_step_k0(fs, sys, traj.xs[0])
    for k in range(1, step):
        fs, _ = filter_step(fs, sys, traj.xs[k])
    x_pred, _ = predict(fs.belief, sys)
    seed = make_seed_set(traj.xs[step], x_pred, fs.eps_x, fs.rng)
    problem = build_p2(fs, sys, seed, x_pred)
    header = (f"# release LP at k={step}, eps_x={fs.eps_x:.9g}, seed={cfg.seed}\n"
              f"# seed box lower={seed.lower.tolist()} upper={seed.upper.tolist()}\n")
    return header + dump(problem)
