"""Reference computations that share no code with the package.

They are deliberately naive: vertex enumeration, scalar loops and
brute-force basis enumeration.
"""

import itertools
import math

import numpy as np
from scipy import integrate


def vertices(lower, upper):
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    for picks in itertools.product((0, 1), repeat=lower.size):
        yield np.where(np.array(picks) == 1, upper, lower)


def image_hull(mat, lower, upper):
    """Box hull of ``mat @ v`` over the vertices of ``[lower, upper]``."""
    pts = np.array([np.asarray(mat, dtype=float) @ v for v in vertices(lower, upper)])
    return pts.min(axis=0), pts.max(axis=0)


def sum_hull(terms):
    """Hull of a Minkowski sum of linear images, by enumerating every vertex combination."""
    per_term = [
        np.array([np.asarray(m, dtype=float) @ v for v in vertices(lo, hi)]) for m, lo, hi in terms
    ]
    lo = hi = None
    for combo in itertools.product(*per_term):
        p = np.sum(combo, axis=0)
        lo = p if lo is None else np.minimum(lo, p)
        hi = p if hi is None else np.maximum(hi, p)
    return lo, hi


def _scalar_image(mat, lo, hi):
    """Tight box image with explicit loops over entries."""
    rows, cols = len(mat), len(mat[0])
    out_lo, out_hi = [], []
    for i in range(rows):
        a = b = 0.0
        for j in range(cols):
            c = mat[i][j]
            a += min(c * lo[j], c * hi[j])
            b += max(c * lo[j], c * hi[j])
        out_lo.append(a)
        out_hi.append(b)
    return out_lo, out_hi


def _add(*boxes):
    n = len(boxes[0][0])
    lo = [sum(b[0][i] for b in boxes) for i in range(n)]
    hi = [sum(b[1][i] for b in boxes) for i in range(n)]
    return lo, hi


def _cap(a, b):
    lo = [max(x, y) for x, y in zip(a[0], b[0])]
    hi = [min(x, y) for x, y in zip(a[1], b[1])]
    if any(l > h for l, h in zip(lo, hi)):
        return None
    return lo, hi


def straight_line_step(mats, x_prev, y_prev, wx, wy, m):
    """One attack step written out formula by formula.

    ``mats`` maps a1..a4, b1, b2 to nested lists; boxes are ``(lower, upper)``
    list pairs.  Returns a dict of every intermediate box.
    """
    a1, a2, a3, a4, b1, b2 = (np.asarray(mats[k], dtype=float) for k in ("a1", "a2", "a3", "a4", "b1", "b2"))
    a1i = np.linalg.inv(a1)
    a2i = np.linalg.inv(a2)
    L = lambda mm: mm.tolist()  # noqa: E731
    mx_back = _add(_scalar_image(L(a1i), *m), _scalar_image(L(-a1i @ a2), *y_prev), _scalar_image(L(-a1i @ b1), *wx))
    my_back = _add(_scalar_image(L(a2i), *m), _scalar_image(L(-a2i @ a1), *x_prev), _scalar_image(L(-a2i @ b1), *wx))
    x_cal = _cap(mx_back, x_prev)
    y_cal = _cap(my_back, y_prev)
    mx_fwd = _add(_scalar_image(L(a1), *x_cal), _scalar_image(L(a2), *y_cal), _scalar_image(L(b1), *wx))
    x_post = _cap(m, mx_fwd)
    y_post = _add(_scalar_image(L(a3), *x_cal), _scalar_image(L(a4), *y_cal), _scalar_image(L(b2), *wy))
    y_pred = _add(_scalar_image(L(a3), *x_prev), _scalar_image(L(a4), *y_prev), _scalar_image(L(b2), *wy))
    x_pred = _add(_scalar_image(L(a1), *x_prev), _scalar_image(L(a2), *y_prev), _scalar_image(L(b1), *wx))
    return {
        "mx_back": mx_back, "my_back": my_back, "x_cal": x_cal, "y_cal": y_cal,
        "mx_fwd": mx_fwd, "x_post": x_post, "y_post": y_post, "y_pred": y_pred, "x_pred": x_pred,
    }


def lp_brute_force(c, a_ub, b_ub, lower, upper, tol=1e-9):
    """Optimum of ``min c v`` over a bounded polytope by enumerating every basis.

    Returns ``None`` when no vertex is feasible.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = [np.asarray(r, dtype=float) for r in np.atleast_2d(a_ub)] if len(a_ub) else []
    rhs = list(np.asarray(b_ub, dtype=float))
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        rows.append(e)
        rhs.append(upper[i])
        rows.append(-e)
        rhs.append(-lower[i])
    A = np.array(rows)
    b = np.array(rhs)
    best = None
    for idx in itertools.combinations(range(len(rows)), n):
        sub = A[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        v = np.linalg.solve(sub, b[list(idx)])
        if np.all(A @ v <= b + tol):
            val = float(c @ v)
            best = val if best is None else min(best, val)
    return best


def truncated_normal_variance(sigma, half):
    """Variance of N(0, sigma^2) restricted to [-half, half], by quadrature."""
    pdf = lambda t: math.exp(-0.5 * (t / sigma) ** 2)  # noqa: E731
    mass, _ = integrate.quad(pdf, -half, half)
    second, _ = integrate.quad(lambda t: t * t * pdf(t), -half, half)
    return second / mass


def ccg_counts(steps, n=2, m_gens=2, x0=(4, 2), y0=(2, 0)):
    """Generator and constraint counts of the exact recursion, step by step.

    Follows the size rules of the three set operations: a linear map keeps the
    sizes, a sum adds both, an intersection adds both plus ``n`` equality rows.
    Observations and disturbances are boxes (``n`` generators, no rows).
    """
    gx, cx = x0
    gy, cy = y0
    out = [(0, gx, cx, gy, cy)]
    for k in range(1, steps + 1):
        gm, cm, gw = m_gens, 0, n
        mxb = (gm + gy + gw, cm + cy)
        myb = (gm + gx + gw, cm + cx)
        xcal = (mxb[0] + gx, mxb[1] + cx + n)
        ycal = (myb[0] + gy, myb[1] + cy + n)
        fwd = (xcal[0] + ycal[0] + gw, xcal[1] + ycal[1])
        xpost = (gm + fwd[0], cm + fwd[1] + n)
        ypost = (xcal[0] + ycal[0] + gw, xcal[1] + ycal[1])
        gx, cx = xpost
        gy, cy = ypost
        out.append((k, gx, cx, gy, cy))
    return out
