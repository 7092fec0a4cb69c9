import numpy as np
import pytest

from oracles import truncated_normal_variance
from support import feasible_candidate, state_at
from volpriv.filters import (
    CoverMiss,
    FilterState,
    PreconditionViolation,
    QuantizerGrid,
    build_p2,
    filter_step,
    filter_step_k0,
    make_mechanism,
    make_seed_set,
    quantizer_release,
    reachable_cover,
    truncated_gaussian_release,
    truncated_gaussian_sample,
)
from volpriv.inference import attack_step, init_belief, predict
from volpriv.intervals import Interval, hull
from volpriv.lp import LpStatus, check_feasible, solve
from volpriv.system import make_rng, simulate


class ZeroRng:
    def uniform(self, *args, **kwargs):
        return 0.0


# -- seed set -------------------------------------------------------------


def test_seed_degenerate_draw():
    x_pred = Interval([0.0, 0.0], [1.0, 1.0])
    seed = make_seed_set([0.3, 0.6], x_pred, 0.5, ZeroRng())
    assert seed == Interval.point([0.3, 0.6])


def test_seed_on_lower_boundary():
    x_pred = Interval([0.0, 0.0], [1.0, 1.0])
    seed, alpha, beta = make_seed_set([0.0, 0.0], x_pred, 0.5, np.random.default_rng(1), return_ratios=True)
    assert alpha == 0.0
    assert np.array_equal(seed.lower, [0.0, 0.0])


def test_seed_postconditions(plant):
    rng = make_rng(5)
    fs, tr = state_at(plant, 3, 1, 0.5)
    x_pred, _ = predict(fs.belief, plant)
    for _ in range(1000):
        seed = make_seed_set(tr.xs[1], x_pred, 0.5, rng)
        assert seed.contains(tr.xs[1])
        assert seed.issubset(x_pred)
        assert seed.surrogate_volume <= 0.5 + 1e-12


def test_seed_ratio_capped_for_large_budget():
    x_pred = Interval([0.0, 0.0], [1.0, 1.0])
    rng = np.random.default_rng(0)
    for _ in range(200):
        assert make_seed_set([0.5, 0.5], x_pred, 100.0, rng).issubset(x_pred)


def test_seed_precondition():
    with pytest.raises(PreconditionViolation):
        make_seed_set([2.0, 0.0], Interval([0.0, 0.0], [1.0, 1.0]), 0.5, np.random.default_rng(0))
    with pytest.raises(ValueError):
        make_seed_set([0.5, 0.5], Interval([0.0, 0.0], [1.0, 1.0]), 0.0, np.random.default_rng(0))


# -- release LP -----------------------------------------------------------


def test_p2_shape_and_feasibility(plant):
    fs, tr = state_at(plant, 1, 1, 0.5)
    x_pred, _ = predict(fs.belief, plant)
    seed = make_seed_set(tr.xs[1], x_pred, 0.5, make_rng(2))
    p = build_p2(fs, plant, seed)
    assert p.n == 1 + 4 * plant.nx
    assert p.names[0] == "eps_y"
    sol = solve(p)
    assert sol.status is LpStatus.OPTIMAL
    assert sol.values[0] >= 0
    assert check_feasible(p, sol.values, tol=1e-8)[0]


def test_p2_seed_equal_to_prediction_pins_release(plant):
    fs, _ = state_at(plant, 1, 1, 0.5)
    x_pred, _ = predict(fs.belief, plant)
    tight = FilterState(fs.belief, x_pred.surrogate_volume + 1e-6, fs.rng)
    sol = solve(build_p2(tight, plant, x_pred))
    assert sol.optimal
    n = plant.nx
    assert np.allclose(sol.values[1:1 + n], x_pred.lower)
    assert np.allclose(sol.values[1 + n:1 + 2 * n], x_pred.upper)
    short = FilterState(fs.belief, 0.5 * x_pred.surrogate_volume, fs.rng)
    assert solve(build_p2(short, plant, x_pred)).status is LpStatus.INFEASIBLE


@pytest.mark.parametrize("seed, k, eps", [(0, 1, 0.5), (1, 3, 0.1), (2, 7, 0.01), (3, 12, 0.25)])
def test_lp_optimum_below_sampled_candidates(plant, seed, k, eps):
    fs, tr = state_at(plant, seed, k, eps)
    x_pred, _ = predict(fs.belief, plant)
    rng = make_rng(seed, 99)
    s = make_seed_set(tr.xs[k], x_pred, eps, rng)
    sol = solve(build_p2(fs, plant, s))
    assert sol.optimal
    eps_y = sol.values[0]
    for _ in range(200):
        m = feasible_candidate(rng, s, x_pred, eps)
        assert m.surrogate_volume <= eps + 1e-9
        _, rep = attack_step(fs.belief, plant, m)
        assert eps_y <= rep.leak_surrogate + 1e-6


# -- release steps -------------------------------------------------------------


def test_release_feasibility_and_leak(plant):
    fs, tr = state_at(plant, 9, 1, 0.1)
    tr = simulate(plant, 40, make_rng(9, (0, 0)))
    for k in range(1, 41):
        x_pred, _ = predict(fs.belief, plant)
        fs, rec = filter_step(fs, plant, tr.xs[k])
        assert rec.s_seed.issubset(rec.m_star)
        assert rec.m_star.issubset(x_pred)
        assert rec.m_star.contains(tr.xs[k])
        assert rec.m_star.surrogate_volume <= 0.1 + 1e-9
        assert rec.report.leak_surrogate <= rec.eps_y_star + 1e-6
        assert rec.lp_status is LpStatus.OPTIMAL


def test_mirror_matches_independent_adversary(plant):
    tr = simulate(plant, 25, make_rng(4, (0, 0)))
    fs = FilterState(None, 0.1, make_rng(4, (0, 1)))
    fs, rec = filter_step_k0(fs, plant, tr.xs[0])
    adv = init_belief(plant, rec.m_star)
    for k in range(1, 26):
        fs, rec = filter_step(fs, plant, tr.xs[k])
        adv, _ = attack_step(adv, plant, rec.m_star)
        for name in ("x_post", "y_post", "x_pred", "y_pred"):
            assert getattr(adv, name) == getattr(fs.belief, name)


def test_inversion_probe(plant):
    """Count steps where a face of the release is pinned to a face of the random seed.

    Pinned faces are what the adversary would need to undo the randomisation;
    the true state itself touches the release boundary with probability zero.
    """
    pinned = touching = steps = 0
    for seed in range(10):
        tr = simulate(plant, 50, make_rng(seed, (0, 0)))
        fs = FilterState(None, 0.1, make_rng(seed, (0, 1)))
        fs, _ = filter_step_k0(fs, plant, tr.xs[0])
        for k in range(1, 51):
            fs, rec = filter_step(fs, plant, tr.xs[k])
            m, s, x = rec.m_star, rec.s_seed, tr.xs[k]
            steps += 1
            pinned += bool(np.any(m.lower == s.lower) or np.any(m.upper == s.upper))
            touching += bool(np.any(m.lower == x) or np.any(m.upper == x))
    assert steps == 500
    assert pinned > 0
    assert touching < steps


def test_first_release(plant):
    rng = make_rng(1)
    for eps in (0.01, 0.1, 0.5, 5.0):
        x0 = rng.uniform(plant.x0_bounds.lower, plant.x0_bounds.upper)
        fs, rec = filter_step_k0(FilterState(None, eps, make_rng(2)), plant, x0)
        assert rec.k == 0
        assert rec.m_star.issubset(plant.x0_bounds)
        assert rec.m_star.contains(x0) and rec.s_seed.issubset(rec.m_star)
        assert rec.m_star.surrogate_volume <= eps + 1e-9
        assert fs.belief.y_post == plant.y0_bounds
    with pytest.raises(ValueError):
        filter_step(FilterState(None, 0.1, make_rng(0)), plant, x0)


# -- quantizer ---------------------------------------------------------------


def test_quantizer_bins():
    # widths are powers of two so bin edges are exact in floating point
    grid = QuantizerGrid.for_budget(Interval([0.0, 0.0], [1.0, 1.0]), 0.5)
    assert np.array_equal(grid.width, [0.25, 0.25])
    b = quantizer_release([0.5, 0.1], grid)
    assert b == Interval([0.5, 0.0], [0.75, 0.25])
    assert b.surrogate_volume == 0.5
    assert quantizer_release([0.5 - 1e-12, 0.1], grid) == Interval([0.25, 0.0], [0.5, 0.25])
    # an edge that is not exactly representable still gives a bin containing the point
    odd = QuantizerGrid.for_budget(Interval([0.0, 0.0], [1.0, 1.0]), 0.2)
    for v in np.linspace(0, 0.9, 91):
        assert quantizer_release([v, v], odd).contains([v, v])
    with pytest.raises(CoverMiss):
        quantizer_release([1.5, 0.5], grid)
    with pytest.raises(ValueError):
        QuantizerGrid.for_budget(Interval([0.0], [1.0]), 0.0)


def test_quantizer_budget_everywhere():
    grid = QuantizerGrid.for_budget(Interval([-1.0, 2.0], [3.0, 5.0]), 0.37)
    for p in np.random.default_rng(0).uniform([-1.0, 2.0], [3.0, 5.0], size=(300, 2)):
        b = quantizer_release(p, grid)
        assert b.contains(p)
        assert b.surrogate_volume <= 0.37 + 1e-12


def _cover_oracle(plant, horizon):
    """Reachable public-state hull from powers of the joint system matrix."""
    n = plant.nx
    big_a = np.block([[plant.a1, plant.a2], [plant.a3, plant.a4]])
    big_b = np.block([[plant.b1, np.zeros((n, 2))], [np.zeros((2, 2)), plant.b2]])
    c0 = np.concatenate([plant.x0_bounds.center, plant.y0_bounds.center])
    r0 = np.concatenate([plant.x0_bounds.radius, plant.y0_bounds.radius])
    cw = np.concatenate([plant.wx_bounds.center, plant.wy_bounds.center])
    rw = np.concatenate([plant.wx_bounds.radius, plant.wy_bounds.radius])
    boxes = []
    for k in range(horizon + 1):
        ak = np.linalg.matrix_power(big_a, k)
        centre = ak @ c0
        rad = np.abs(ak) @ r0
        for j in range(k):
            aj = np.linalg.matrix_power(big_a, j) @ big_b
            centre = centre + aj @ cw
            rad = rad + np.abs(aj) @ rw
        boxes.append(Interval(centre[:n] - rad[:n], centre[:n] + rad[:n]))
    return hull(boxes)


def test_reachable_cover(plant):
    cover = reachable_cover(plant, 60)
    assert cover.allclose(_cover_oracle(plant, 60), atol=1e-9)
    for seed in range(20):
        tr = simulate(plant, 60, make_rng(seed, (0, 0)))
        assert all(cover.contains(x) for x in tr.xs)


# -- truncated Gaussian ---------------------------------------------------------


def test_gaussian_release_width():
    rng = np.random.default_rng(0)
    for eps in (0.01, 0.3, 2.0):
        box = truncated_gaussian_release([1.0, 2.0], eps, rng)
        assert box.surrogate_volume == pytest.approx(eps, rel=1e-12)
        assert np.allclose(box.widths, eps / 2)


def test_gaussian_support_and_variance():
    eps = 0.5
    v = truncated_gaussian_sample(eps, 100_000, np.random.default_rng(3))
    assert np.all(np.abs(v) <= eps / 2)
    ref = truncated_normal_variance(eps, eps / 2)
    # quadrature value, frozen for sigma = 0.5 truncated at +-0.25
    assert ref == pytest.approx(0.02014728865020293, rel=1e-9)
    assert np.var(v) == pytest.approx(ref, rel=0.05)
    with pytest.raises(ValueError):
        truncated_gaussian_sample(0.0, 3, np.random.default_rng(0))


@pytest.mark.parametrize("name", ["optimal", "quantizer", "gaussian"])
def test_mechanisms_deterministic(plant, name):
    tr = simulate(plant, 10, make_rng(0, (0, 0)))

    def releases():
        mech = make_mechanism(name, plant, 0.1, make_rng(0, (0, 1)), 10)
        out = []
        belief = None
        for k in range(11):
            m = mech.release(k, tr.xs[k], belief)
            out.append(m)
            belief = init_belief(plant, m) if k == 0 and mech.strict else belief
        return out

    assert releases() == releases()


def test_unknown_mechanism(plant):
    with pytest.raises(ValueError, match="unknown mechanism"):
        make_mechanism("laplace", plant, 0.1, make_rng(0))
