# %% [markdown]
# # Brute force as ground truth
#
# On tiny instances the oracle enumerates PM schedules and run patterns and
# solves production exactly for each. Its optimum must equal the branch and
# bound result on the built model.

# %%
from prodmaint.builder import build
from prodmaint.milp import solve_milp
from prodmaint.oracle import pm_schedules, random_instance, solve_exhaustive

print(pm_schedules(4))
print(pm_schedules(8, periodic=True))

# %%
worst = 0.0
for seed in range(30):
    inst = random_instance(seed)
    want = solve_exhaustive(inst)
    got = solve_milp(build(inst))
    assert got.status == want.status
    worst = max(worst, abs(got.objective - want.objective))
print("largest objective difference:", worst)

# %%
inst = random_instance(3)
res = solve_exhaustive(inst)
print(inst.horizon, len(inst.products), res.objective, res.plan.pm_periods)
