"""Linear public/private model with bounded disturbances.

    x_k = A1 x_{k-1} + A2 y_{k-1} + B1 wx_k
    y_k = A3 x_{k-1} + A4 y_{k-1} + B2 wy_k

``x`` is the public state (released through an observation set), ``y`` the
private one.  A1 and A2 must be invertible so the adversary can run the
backward calibration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .intervals import Interval

__all__ = [
    "LinearSystem",
    "Trajectory",
    "RngStream",
    "make_rng",
    "case_study_preset",
    "validate",
    "sample_disturbance",
    "simulate",
    "InvalidSystem",
]

_DET_TOL = 1e-12


class InvalidSystem(ValueError):
    """Raised when a system definition fails validation."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True, eq=False)
class LinearSystem:
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    a4: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    wx_bounds: Interval
    wy_bounds: Interval
    x0_bounds: Interval
    y0_bounds: Interval
    # "case_study" draws the periodic production-inventory signals,
    # "uniform" draws uniformly from the disturbance boxes
    disturbance: str = "case_study"

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "b1", "b2"):
            m = np.atleast_2d(np.array(getattr(self, name), dtype=float))
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    @property
    def nx(self) -> int:
        return self.a1.shape[0]

    @property
    def ny(self) -> int:
        return self.a4.shape[0]

    @cached_property
    def a1_inv(self) -> np.ndarray:
        return np.linalg.inv(self.a1)

    @cached_property
    def a2_inv(self) -> np.ndarray:
        return np.linalg.inv(self.a2)

    def to_dict(self) -> dict:
        d = {name: getattr(self, name).tolist() for name in ("a1", "a2", "a3", "a4", "b1", "b2")}
        for name in ("wx_bounds", "wy_bounds", "x0_bounds", "y0_bounds"):
            d[name] = getattr(self, name).to_dict()
        d["disturbance"] = self.disturbance
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LinearSystem":
        kw = {name: np.array(d[name], dtype=float) for name in ("a1", "a2", "a3", "a4", "b1", "b2")}
        for name in ("wx_bounds", "wy_bounds", "x0_bounds", "y0_bounds"):
            kw[name] = Interval.from_dict(d[name])
        kw["disturbance"] = d.get("disturbance", "uniform")
        return cls(**kw)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "LinearSystem":
        return cls.from_dict(json.loads(Path(path).read_text()))


def validate(sys: LinearSystem) -> list[str]:
    """Names every violated invariant; an empty list means the system is usable."""
    problems = []
    mats = {n: getattr(sys, n) for n in ("a1", "a2", "a3", "a4", "b1", "b2")}
    for name, m in mats.items():
        if m.ndim != 2 or not np.all(np.isfinite(m)):
            problems.append(f"{name}: must be a finite matrix")
    if problems:
        return problems

    nx, ny = sys.a1.shape[0], sys.a4.shape[0]
    for name in ("a1", "a2"):
        m = mats[name]
        if m.shape[0] != m.shape[1]:
            problems.append(f"{name}: must be square, got shape {m.shape}")
        elif abs(np.linalg.det(m)) <= _DET_TOL:
            problems.append(f"{name}: singular matrix (|det| <= {_DET_TOL:g})")
    if sys.a1.shape != (nx, nx):
        problems.append(f"a1: expected shape {(nx, nx)}, got {sys.a1.shape}")
    if sys.a2.shape != (nx, ny):
        problems.append(f"a2: expected shape {(nx, ny)}, got {sys.a2.shape}")
    if sys.a3.shape != (ny, nx):
        problems.append(f"a3: expected shape {(ny, nx)}, got {sys.a3.shape}")
    if sys.a4.shape != (ny, ny):
        problems.append(f"a4: expected shape {(ny, ny)}, got {sys.a4.shape}")
    if sys.b1.shape[0] != nx:
        problems.append(f"b1: expected {nx} rows, got {sys.b1.shape[0]}")
    if sys.b2.shape[0] != ny:
        problems.append(f"b2: expected {ny} rows, got {sys.b2.shape[0]}")

    expected = {
        "wx_bounds": sys.b1.shape[1],
        "wy_bounds": sys.b2.shape[1],
        "x0_bounds": nx,
        "y0_bounds": ny,
    }
    for name, dim in expected.items():
        iv = getattr(sys, name)
        if not isinstance(iv, Interval):
            problems.append(f"{name}: must be an Interval")
        elif iv.n != dim:
            problems.append(f"{name}: expected dimension {dim}, got {iv.n}")
    if sys.disturbance not in ("case_study", "uniform"):
        problems.append(f"disturbance: unknown sampler {sys.disturbance!r}")
    elif sys.disturbance == "case_study" and (expected["wx_bounds"], expected["wy_bounds"]) != (2, 2):
        problems.append("disturbance: the case-study sampler needs 2-D disturbances")
    return problems


def case_study_preset() -> LinearSystem:
    """The production-inventory system (inventory public, production rate private)."""
    return LinearSystem(
        a1=np.eye(2),
        a2=np.array([[0.40, 0.80], [0.60, 0.20]]),
        a3=np.array([[0.50, -0.90], [-0.10, -0.10]]),
        a4=np.array([[-0.10, -0.90], [0.10, 0.00]]),
        b1=-np.eye(2),
        b2=np.diag([4.20, 2.40]),
        wx_bounds=Interval([1.74, 1.91], [1.94, 2.01]),
        wy_bounds=Interval([0.91, 0.23], [0.95, 0.43]),
        x0_bounds=Interval([1.00, 0.24], [1.20, 0.40]),
        y0_bounds=Interval([2.40, 0.60], [3.70, 1.30]),
        disturbance="case_study",
    )


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream keyed by ``(seed, stream)``."""

    seed: int
    stream: int | tuple = 0

    def generator(self) -> np.random.Generator:
        key = self.stream if isinstance(self.stream, tuple) else (self.stream,)
        return np.random.default_rng(np.random.SeedSequence(entropy=self.seed, spawn_key=key))


def make_rng(seed: int, stream: int | tuple = 0) -> np.random.Generator:
    return RngStream(seed, stream).generator()


def sample_disturbance(k: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Periodic demand/productivity fluctuations of the case study at step ``k``."""
    if k < 0:
        raise ValueError("time index must be non-negative")
    rho, gamma, tau = rng.uniform(0.0, 1.0, size=3)
    wx = np.array([1.88 + 0.03 * np.cos(2 * np.pi * k / (30 + 7 * rho)), 1.94])
    wy = np.array([
        0.944 + 0.006 * np.cos(2 * np.pi * k / (7 + 2 * gamma)),
        0.33 + 0.094 * np.sin(2 * np.pi * k / (7 + 4 * tau)),
    ])
    return wx, wy


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States for k = 0..K; ``wxs[k-1]`` and ``wys[k-1]`` drive step k."""

    xs: np.ndarray
    ys: np.ndarray
    wxs: np.ndarray
    wys: np.ndarray

    @property
    def horizon(self) -> int:
        return self.xs.shape[0] - 1


def simulate(sys: LinearSystem, horizon: int, rng: np.random.Generator) -> Trajectory:
    problems = validate(sys)
    if problems:
        raise InvalidSystem(problems)
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    x = rng.uniform(sys.x0_bounds.lower, sys.x0_bounds.upper)
    y = rng.uniform(sys.y0_bounds.lower, sys.y0_bounds.upper)
    xs, ys, wxs, wys = [x], [y], [], []
    for k in range(1, horizon + 1):
        if sys.disturbance == "case_study":
            wx, wy = sample_disturbance(k, rng)
        else:
            wx = rng.uniform(sys.wx_bounds.lower, sys.wx_bounds.upper)
            wy = rng.uniform(sys.wy_bounds.lower, sys.wy_bounds.upper)
        x, y = (
            sys.a1 @ x + sys.a2 @ y + sys.b1 @ wx,
            sys.a3 @ x + sys.a4 @ y + sys.b2 @ wy,
        )
        xs.append(x)
        ys.append(y)
        wxs.append(wx)
        wys.append(wy)
    return Trajectory(np.array(xs), np.array(ys), np.array(wxs), np.array(wys))
