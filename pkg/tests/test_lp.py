import numpy as np
import pytest

from oracles import lp_brute_force
from volpriv.lp import LpProblem, LpStatus, check_feasible, dump, solve


def test_single_lower_bound():
    sol = solve(LpProblem([1.0], lower=[3.0]))
    assert sol.status is LpStatus.OPTIMAL
    assert sol.values[0] == pytest.approx(3.0)


def test_free_variable_unbounded():
    sol = solve(LpProblem([-1.0], lower=[-np.inf], upper=[np.inf]))
    assert sol.status is LpStatus.UNBOUNDED


def test_two_variable_example():
    p = LpProblem([1.0, 1.0], a_ub=[[-1.0, -1.0]], b_ub=[-1.0], upper=[0.25, np.inf])
    sol = solve(p)
    assert sol.optimal
    assert sol.objective_value == pytest.approx(1.0, abs=1e-12)
    assert check_feasible(p, sol.values)[0]


def test_infeasible():
    p = LpProblem([1.0, 0.0], a_ub=[[1.0, 1.0]], b_ub=[-1.0])
    assert solve(p).status is LpStatus.INFEASIBLE
    assert solve(p, method="highs").status is LpStatus.INFEASIBLE


def test_equality_and_mirrored_bounds():
    # v0 only bounded above, v1 free, v0 + v1 == 2, minimise v1 - v0
    p = LpProblem([-1.0, 1.0], a_eq=[[1.0, 1.0]], b_eq=[2.0],
                  lower=[-np.inf, -np.inf], upper=[5.0, np.inf])
    sol = solve(p)
    assert sol.optimal
    assert sol.values == pytest.approx([5.0, -3.0])
    assert sol.objective_value == pytest.approx(-8.0)


def test_redundant_equalities():
    p = LpProblem([1.0, 2.0], a_eq=[[1.0, 1.0], [2.0, 2.0]], b_eq=[1.0, 2.0])
    sol = solve(p)
    assert sol.optimal
    assert sol.objective_value == pytest.approx(1.0)


def test_validation_rejects_bad_input():
    with pytest.raises(ValueError):
        LpProblem([1.0, np.nan])
    with pytest.raises(ValueError):
        LpProblem([1.0], a_ub=[[1.0, 2.0]], b_ub=[1.0])
    with pytest.raises(ValueError):
        LpProblem([1.0], a_ub=[[np.inf]], b_ub=[1.0])
    with pytest.raises(ValueError):
        solve(LpProblem([1.0]), method="nope")


def test_check_feasible_flags_bound_violation():
    p = LpProblem([1.0, 1.0], a_ub=[[1.0, 1.0]], b_ub=[1.0], upper=[1.0, 1.0])
    ok, worst = check_feasible(p, [0.5, 0.5])
    assert ok and worst == 0.0
    ok, worst = check_feasible(p, [1.5, -0.5])
    assert not ok and worst == pytest.approx(0.5)


def _random_box_lp(rng, n, m):
    c = rng.normal(size=n)
    a = rng.normal(size=(m, n))
    lo = rng.uniform(-2, 0, size=n)
    hi = rng.uniform(0, 2, size=n)
    # the origin is strictly feasible, so every instance has a solution
    b = rng.uniform(0.1, 2.0, size=m)
    return LpProblem(c, a_ub=a, b_ub=b, lower=lo, upper=hi)


@pytest.mark.parametrize("seed", range(40))
def test_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 5))
    p = _random_box_lp(rng, n, m)
    ref = lp_brute_force(p.objective, p.a_ub, p.b_ub, p.lower, p.upper)
    sol = solve(p)
    assert sol.optimal
    assert sol.objective_value == pytest.approx(ref, abs=1e-7)
    assert solve(p, method="highs").objective_value == pytest.approx(ref, abs=1e-7)


@pytest.mark.parametrize("seed", range(20))
def test_weak_duality_against_sampled_points(seed):
    rng = np.random.default_rng(100 + seed)
    p = _random_box_lp(rng, 4, 3)
    sol = solve(p)
    assert sol.optimal and check_feasible(p, sol.values)[0]
    pts = rng.uniform(p.lower, p.upper, size=(4000, p.n))
    feasible = pts[np.all(pts @ p.a_ub.T <= p.b_ub, axis=1)]
    assert len(feasible) > 0
    for v in feasible[:200]:
        assert check_feasible(p, v)[0]
        assert p.objective @ v >= sol.objective_value - 1e-7


def test_deterministic():
    p = _random_box_lp(np.random.default_rng(7), 5, 4)
    a, b = solve(p), solve(p)
    assert a.status is b.status
    assert a.objective_value == b.objective_value
    assert np.array_equal(a.values, b.values)


def test_degenerate_problem_terminates():
    # several constraints meet at the optimum; Bland's rule must not cycle
    a = np.array([[0.5, -5.5, -2.5, 9.0], [0.5, -1.5, -0.5, 1.0], [1.0, 0.0, 0.0, 0.0]])
    p = LpProblem([-10.0, 57.0, 9.0, 24.0], a_ub=a, b_ub=[0.0, 0.0, 1.0])
    sol = solve(p)
    assert sol.optimal
    assert sol.objective_value == pytest.approx(-1.0)


def test_dump_lists_every_row():
    p = LpProblem([1.0, 0.0], a_ub=[[1.0, 1.0], [1.0, -1.0]], b_ub=[1.0, 0.0],
                  a_eq=[[0.0, 1.0]], b_eq=[0.5], names=["a", "b"])
    text = dump(p)
    assert text.startswith("minimize +1*a")
    assert "ub0: +1*a +1*b <= 1" in text
    assert "ub1: +1*a -1*b <= 0" in text
    assert "eq0: +1*b == 0.5" in text
    assert text.count("\n") == 2 + 3 + 1 + 2
