"""Axis-aligned boxes and the interval arithmetic used by the inference attack.

A box is stored as a pair of bound vectors.  All set operations are exact in
floating point: no outward rounding and no epsilon fuzzing.  Tolerances only
appear in the tests.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DimensionError",
    "Interval",
    "PsiMatrix",
    "psi_apply",
    "minkowski_sum",
    "difference",
    "intersect",
    "contains",
    "hull",
]


class DimensionError(ValueError):
    """Operands have incompatible dimensions."""


class Interval:
    """Box ``{v : lower <= v <= upper}`` in R^n.

    A constructed interval is never empty; an empty intersection is reported
    as ``None`` by :func:`intersect`.
    """

    __slots__ = ("lower", "upper")

    def __init__(self, lower, upper):
        lower = np.array(lower, dtype=float).reshape(-1)
        upper = np.array(upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise DimensionError(
                f"bound vectors differ in length: {lower.size} vs {upper.size}"
            )
        if lower.size == 0:
            raise DimensionError("an interval needs at least one dimension")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("interval bounds must be finite")
        if np.any(lower > upper):
            bad = np.flatnonzero(lower > upper).tolist()
            raise ValueError(f"lower > upper in coordinates {bad}")
        lower.setflags(write=False)
        upper.setflags(write=False)
        self.lower = lower
        self.upper = upper

    @classmethod
    def point(cls, v) -> "Interval":
        v = np.asarray(v, dtype=float)
        return cls(v, v)

    @classmethod
    def from_center_radius(cls, center, radius) -> "Interval":
        center = np.asarray(center, dtype=float)
        radius = np.asarray(radius, dtype=float)
        return cls(center - radius, center + radius)

    @property
    def n(self) -> int:
        return self.lower.size

    @property
    def center(self) -> np.ndarray:
        return (self.upper + self.lower) / 2

    @property
    def radius(self) -> np.ndarray:
        return (self.upper - self.lower) / 2

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def volume(self) -> float:
        """Lebesgue measure, the product of the side lengths."""
        return float(np.prod(self.widths))

    @property
    def surrogate_volume(self) -> float:
        """Total side length, a linear proxy for the volume."""
        return float(np.sum(self.widths))

    def stacked(self) -> np.ndarray:
        """Bounds as one vector ``[lower; upper]``."""
        return np.concatenate([self.lower, self.upper])

    def issubset(self, other: "Interval", tol: float = 0.0) -> bool:
        _check_same_dim(self, other)
        return bool(
            np.all(self.lower >= other.lower - tol)
            and np.all(self.upper <= other.upper + tol)
        )

    def contains(self, point, tol: float = 0.0) -> bool:
        return contains(self, point, tol)

    def allclose(self, other: "Interval", atol: float = 1e-12) -> bool:
        return self.n == other.n and bool(
            np.allclose(self.lower, other.lower, rtol=0, atol=atol)
            and np.allclose(self.upper, other.upper, rtol=0, atol=atol)
        )

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))

    def __add__(self, other):
        if isinstance(other, Interval):
            return minkowski_sum(self, other)
        return NotImplemented

    def __repr__(self):
        lo = np.array2string(self.lower, precision=6, separator=", ")
        hi = np.array2string(self.upper, precision=6, separator=", ")
        return f"Interval(lower={lo}, upper={hi})"

    def to_dict(self) -> dict:
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Interval":
        return cls(d["lower"], d["upper"])


class PsiMatrix:
    """Positive/negative split of a matrix for tight box images.

    ``pos = (A + |A|) / 2`` and ``neg = (A - |A|) / 2``, so ``pos + neg == A``.
    The blocks are derived on access.
    """

    __slots__ = ("base",)

    def __init__(self, base):
        base = np.atleast_2d(np.array(base, dtype=float))
        if base.ndim != 2:
            raise DimensionError("Psi base must be a matrix")
        base.setflags(write=False)
        self.base = base

    @property
    def pos(self) -> np.ndarray:
        return (self.base + np.abs(self.base)) / 2

    @property
    def neg(self) -> np.ndarray:
        return (self.base - np.abs(self.base)) / 2

    @property
    def shape(self):
        return self.base.shape

    def stacked(self) -> np.ndarray:
        """The (2m x 2n) block matrix acting on stacked ``[lower; upper]``."""
        p, q = self.pos, self.neg
        return np.block([[p, q], [q, p]])

    def __matmul__(self, iv):
        if isinstance(iv, Interval):
            return psi_apply(self, iv)
        return NotImplemented


def _check_same_dim(a: Interval, b: Interval) -> None:
    if a.n != b.n:
        raise DimensionError(f"dimension mismatch: {a.n} vs {b.n}")


def psi_apply(m, iv: Interval) -> Interval:
    """Tightest box containing ``{A v : v in iv}``.

    ``m`` may be a :class:`PsiMatrix` or anything convertible to a matrix.
    """
    if not isinstance(m, PsiMatrix):
        m = PsiMatrix(m)
    if m.shape[1] != iv.n:
        raise DimensionError(
            f"matrix has {m.shape[1]} columns but interval has dimension {iv.n}"
        )
    pos, neg = m.pos, m.neg
    lower = pos @ iv.lower + neg @ iv.upper
    upper = neg @ iv.lower + pos @ iv.upper
    return Interval(lower, upper)


def minkowski_sum(a: Interval, b: Interval, *more: Interval) -> Interval:
    lower = a.lower + 0.0
    upper = a.upper + 0.0
    for other in (b, *more):
        _check_same_dim(a, other)
        lower = lower + other.lower
        upper = upper + other.upper
    return Interval(lower, upper)


def difference(a: Interval, b: Interval) -> tuple[np.ndarray, np.ndarray]:
    """Signed bound pair ``(a.lower - b.lower, a.upper - b.upper)``.

    Only meaningful for volume bookkeeping; the entries need not be ordered,
    so the result is not an :class:`Interval`.
    """
    _check_same_dim(a, b)
    return a.lower - b.lower, a.upper - b.upper


def intersect(a: Interval, b: Interval) -> Interval | None:
    """Intersection of two boxes, or ``None`` when it is empty."""
    _check_same_dim(a, b)
    lower = np.maximum(a.lower, b.lower)
    upper = np.minimum(a.upper, b.upper)
    if np.any(lower > upper):
        return None
    return Interval(lower, upper)


def contains(iv: Interval, point, tol: float = 0.0) -> bool:
    point = np.asarray(point, dtype=float).reshape(-1)
    if point.size != iv.n:
        raise DimensionError(f"point has {point.size} entries, interval has {iv.n}")
    return bool(np.all(iv.lower - tol <= point) and np.all(point <= iv.upper + tol))


def hull(boxes) -> Interval:
    """Smallest box containing every box in ``boxes``."""
    boxes = list(boxes)
    if not boxes:
        raise ValueError("hull of an empty collection")
    lower = np.min([b.lower for b in boxes], axis=0)
    upper = np.max([b.upper for b in boxes], axis=0)
    return Interval(lower, upper)
