# %% [markdown]
# # Watching the adversary narrow down production
#
# The case-study plant has a public inventory level `x` and a private production
# rate `y`. A curious observer sees a box around `x` at every step and runs the
# set-membership recursion to pin `y` down. Here we release plain boxes of fixed
# half-width around the true inventory and watch how much the observer learns.

# %%
import numpy as np

from volpriv import Interval, attack_step, case_study_preset, init_belief, make_rng, simulate
from volpriv.inference import matrix_norm1

plant = case_study_preset()
traj = simulate(plant, 12, make_rng(7))
print("inventory x0 =", traj.xs[0], " production y0 =", traj.ys[0])
print("prior on production:", plant.y0_bounds)

# %% [markdown]
# ## A naive release
#
# Each release is the true inventory padded by 0.05 on each side, so its total
# width is 0.2. The observer never sees `y`.

# %%
half = np.full(plant.nx, 0.05)
belief = init_belief(plant, Interval.from_center_radius(traj.xs[0], half))
print(f"{'k':>2} {'width(Y pred)':>14} {'width(Y post)':>14} {'leak':>8} {'y inside':>9}")
for k in range(1, 13):
    m = Interval.from_center_radius(traj.xs[k], half)
    belief, rep = attack_step(belief, plant, m)
    print(f"{k:>2} {belief.y_pred.surrogate_volume:14.4f} {belief.y_post.surrogate_volume:14.4f} "
          f"{rep.leak_surrogate:8.4f} {str(belief.y_post.contains(traj.ys[k])):>9}")

# %% [markdown]
# The posterior always contains the true production rate (the recursion is
# sound), and every step with a positive leak is information the observer did
# not have from the dynamics alone.
#
# ## Where the leak comes from
#
# The leak can be written through how much the observation cut into the
# predicted public set and the calibrated private set. The report carries both
# routes plus the bounds on either side.

# %%
print("leak (direct)          :", rep.leak_surrogate)
print("leak (via shrinkage)   :", rep.leak_via_shrinkage)
print("lower bound (shift)    :", rep.lower_bound)
print("upper bound (norms)    :", rep.upper_bound)
print("|A3|_1, |A4|_1         :", matrix_norm1(plant.a3), matrix_norm1(plant.a4))
for name, (ok, residual) in rep.bound_checks.items():
    print(f"  {name:16s} ok={ok}  residual={residual:+.2e}")

# %% [markdown]
# Tighter releases leak more. Rerun with `half = 0.005` and the posterior
# width collapses within a handful of steps.
