"""Scenario builders shared by the unit tests and the acceptance suite."""

from volpriv.filters import FilterState, filter_step, filter_step_k0
from volpriv.inference import predict
from volpriv.intervals import Interval
from volpriv.system import make_rng, simulate


def mats(plant):
    return {k: getattr(plant, k).tolist() for k in ("a1", "a2", "a3", "a4", "b1", "b2")}


def pair(iv):
    return (list(iv.lower), list(iv.upper))


def run_filter(plant, seed, steps, eps=0.1):
    """Trajectory plus the belief sequence produced by the optimal filter."""
    tr = simulate(plant, steps, make_rng(seed, (0, 0)))
    fs = FilterState(None, eps, make_rng(seed, (0, 1)))
    fs, _ = filter_step_k0(fs, plant, tr.xs[0])
    beliefs = [fs.belief]
    records = []
    for k in range(1, steps + 1):
        fs, rec = filter_step(fs, plant, tr.xs[k])
        beliefs.append(fs.belief)
        records.append(rec)
    return tr, beliefs, records


def state_at(plant, seed, k, eps):
    """Filter state just before the release at step ``k`` and the trajectory."""
    tr = simulate(plant, max(k, 1), make_rng(seed, (0, 0)))
    fs = FilterState(None, eps, make_rng(seed, (0, 1)))
    fs, _ = filter_step_k0(fs, plant, tr.xs[0])
    for j in range(1, k):
        fs, _ = filter_step(fs, plant, tr.xs[j])
    return fs, tr


def random_attack_step(plant, rng):
    """A consistent belief and an observation box containing the true next state."""
    seed = int(rng.integers(0, 10_000))
    k = int(rng.integers(1, 20))
    tr, beliefs, _ = run_filter(plant, seed, k, eps=float(rng.choice([0.01, 0.1, 0.5])))
    b = beliefs[k - 1]
    x_pred, _ = predict(b, plant)
    x = tr.xs[k]
    lo = x - rng.uniform(0, 1, 2) * (x - x_pred.lower)
    hi = x + rng.uniform(0, 1, 2) * (x_pred.upper - x)
    return b, Interval(lo, hi)


def feasible_candidate(rng, seed_box, x_pred, eps):
    """Random box between the seed and the prediction, shrunk onto the budget."""
    lo = x_pred.lower + rng.uniform(0, 1, seed_box.n) * (seed_box.lower - x_pred.lower)
    hi = seed_box.upper + rng.uniform(0, 1, seed_box.n) * (x_pred.upper - seed_box.upper)
    m = Interval(lo, hi)
    extra = m.surrogate_volume - seed_box.surrogate_volume
    room = eps - seed_box.surrogate_volume
    if extra > room:
        t = room / extra
        m = Interval(seed_box.lower - t * (seed_box.lower - lo), seed_box.upper + t * (hi - seed_box.upper))
    return m
