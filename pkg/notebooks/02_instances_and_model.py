# %% [markdown]
# # Fixtures and the linearized model
#
# The built-in fixtures carry the published demand, cost and age tables. An
# options preset fixes the conventions, and the builder turns an instance into
# a MILP with named rows.

# %%
from collections import Counter

from prodmaint.builder import build
from prodmaint.instance import FIXTURES, dumps, fixture, validate

print(FIXTURES)
inst = fixture("model_A", preset="paper_tables")
print(inst.options)
print([p.demand for p in inst.products])
print(inst.machine.pm_cost)

# %% [markdown]
# Row means of the PM tables. The dependency rows are rounded in the source
# tables, so they land near but not exactly on 4000 and 4.

# %%
for name in FIXTURES:
    m = fixture(name).machine
    print(f"{name:11s} {sum(m.pm_cost) / 8:9.3f} {sum(m.pm_time) / 8:7.4f}")

# %%
model = build(inst)
print(len(model.variables), "variables,", len(model.constraints), "rows")
print(Counter(c.name.split("_")[0] for c in model.constraints))

# %%
periodic = build(inst, periodic=True)
print(len(periodic.variables), len(periodic.constraints))

# %% [markdown]
# Validation reports every problem with its path instead of stopping at the
# first one.

# %%
print(validate(inst))
print(dumps(inst)[:300])
