from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from prodmaint.builder import build
from prodmaint.evaluator import check, cost, make_plan
from prodmaint.milp import solve_milp, verify
from prodmaint.oracle import OracleCaps, OracleRefusal, pm_schedules, random_instance, solve_exhaustive
from conftest import small_instance


def test_single_unit():
    inst = small_instance(1, [(1,)])
    res = solve_exhaustive(inst)
    assert res.status == "optimal" and res.objective == 240
    assert res.objective == solve_milp(build(inst)).objective
    produce = make_plan(inst, (), (1,), [(1,)])
    assert cost(produce, inst).total == 1590


def test_zero_demand_is_all_idle():
    inst = small_instance(2, [(0, 0)])
    res = solve_exhaustive(inst)
    assert res.objective == 0
    assert res.plan.Y == (0, 0) and res.plan.pm_periods == ()


def test_result_is_a_feasible_model_assignment():
    inst = random_instance(7, T=3, P=2)
    res = solve_exhaustive(inst)
    model = build(inst)
    assert verify(model, res.x) == []
    assert model.objective_value(res.x) == pytest.approx(res.objective, abs=1e-9)
    assert check(res.plan, inst) == []


@pytest.mark.parametrize("change,match", [
    (dict(T=5), "horizon"),
    (dict(P=3), "products"),
])
def test_refuses_beyond_caps(change, match):
    inst = random_instance(1, T=change.get("T", 2), P=change.get("P", 1),
                           caps=OracleCaps(max_T=5, max_P=3))
    with pytest.raises(OracleRefusal, match=match):
        solve_exhaustive(inst)


def test_refuses_large_demand_and_continuous_quantities():
    with pytest.raises(OracleRefusal, match="demand"):
        solve_exhaustive(small_instance(2, [(6, 0)]))
    inst = small_instance(2, [(1, 0)])
    relaxed = replace(inst, options=replace(inst.options, integral_quantities=False))
    with pytest.raises(OracleRefusal):
        solve_exhaustive(relaxed)


def test_pm_schedules():
    assert pm_schedules(1) == [()]
    assert sorted(pm_schedules(3)) == [(), (2,), (2, 3), (3,)]
    assert len(pm_schedules(4)) == 8
    assert set(pm_schedules(8, periodic=True)) == {
        (2, 3, 4, 5, 6, 7, 8), (3, 5, 7), (4, 7), (5,), (6,), (7,), (8,), ()}


def test_idle_plan_makes_every_valid_instance_feasible():
    # backlog may remain at the horizon end, so doing nothing is always allowed
    inst = small_instance(2, [(1, 1)], capacity=5.0)
    idle = make_plan(inst, (), (0, 0), [(0, 0)])
    assert check(idle, inst) == []
    res = solve_exhaustive(inst)
    assert res.status == "optimal" and res.objective == cost(idle, inst).total == 240 * 3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["start_of_period", "paper_literal"]), st.booleans())
def test_oracle_matches_branch_and_bound(seed, convention, periodic):
    inst = random_instance(seed)
    inst = replace(inst, options=replace(inst.options, age_convention=convention, periodic=periodic))
    want = solve_exhaustive(inst)
    got = solve_milp(build(inst))
    assert got.status == want.status
    if want.status == "optimal":
        assert got.objective == pytest.approx(want.objective, abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.data())
def test_oracle_is_a_lower_bound_on_any_feasible_plan(seed, data):
    inst = random_instance(seed, T=3)
    best = solve_exhaustive(inst).objective
    T = inst.horizon
    pms = data.draw(st.sampled_from(pm_schedules(T)))
    Y = data.draw(st.lists(st.sampled_from([0, 1]), min_size=T, max_size=T))
    prod = [tuple(data.draw(st.integers(0, 5)) if Y[t] else 0 for t in range(T)) for _ in inst.products]
    plan = make_plan(inst, pms, Y, prod)
    if check(plan, inst) == []:
        assert cost(plan, inst).total >= best - 1e-6
