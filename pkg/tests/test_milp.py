import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import Bounds, LinearConstraint, milp

from prodmaint.builder import build
from prodmaint.instance import fixture, with_options
from prodmaint.milp import (
    BRANCHING_RULES,
    SolveConfig,
    read_solution,
    solve_lp,
    solve_milp,
    verify,
    write_solution,
)
from prodmaint.model import MilpModel
from prodmaint.oracle import random_instance
from conftest import small_instance


def reference(model):
    """Optimum from scipy's HiGHS branch and cut, for cross-checking."""
    c, A, lo, hi, lb, ub, is_int = model.arrays()
    res = milp(c, constraints=LinearConstraint(A, lo, hi), bounds=Bounds(lb, ub),
               integrality=is_int.astype(int), options={"mip_rel_gap": 0})
    return res.fun if res.status == 0 else None


def one_unit():
    """One period, one product, one unit of demand, default options."""
    return small_instance(1, [(1,)])


def test_single_unit_optimum_is_to_backorder():
    res = solve_milp(build(one_unit()))
    assert res.status == "optimal"
    assert res.objective == 240  # one unit outstanding for one period
    assert res.value("x_1_1") == 0 and res.value("Y_1") == 0


def test_single_unit_produce_plan_costs_1590():
    m = build(one_unit())
    m.var("x_1_1").lb = 1
    res = solve_milp(m)
    # unit cost + setup + expected repairs at age 0
    assert res.objective == pytest.approx(90 + 1000 + 0.25 * 2000, abs=1e-9)


def test_single_unit_four_patterns_by_hand():
    # (Y, y) in {0,1}^2: only y <= Y is feasible; producing needs y = 1
    m = build(one_unit())
    costs = {}
    for Y in (0, 1):
        for y in (0, 1):
            mm = build(one_unit())
            for name, v in (("Y_1", Y), ("y_1_1", y)):
                mm.var(name).lb = mm.var(name).ub = v
            r = solve_milp(mm)
            costs[Y, y] = r.objective if r.status == "optimal" else None
    assert costs == {(0, 0): 240, (0, 1): None, (1, 0): 240 + 500, (1, 1): 1590}
    assert solve_milp(m).objective == min(v for v in costs.values() if v is not None)


def test_knapsack_against_reference():
    m = MilpModel()
    w = [5, 7, 4, 3, 9, 6]
    v = [10, 13, 7, 6, 17, 11]
    idx = [m.add_var(f"k{i}", "binary") for i in range(6)]
    m.add_constraint("cap", list(zip(idx, w)), "<=", 17)
    m.set_objective([(j, -val) for j, val in zip(idx, v)])
    res = solve_milp(m)
    assert res.objective == pytest.approx(reference(m), abs=1e-9)


def test_integer_infeasible():
    m = MilpModel()
    j = m.add_var("n", "integer", 0, 10)
    m.add_constraint("r1", [(j, 2)], ">=", 3)
    m.add_constraint("r2", [(j, 2)], "<=", 3.5)
    m.set_objective([(j, 1)])
    assert solve_lp(m).status == "optimal"
    res = solve_milp(m)
    assert res.status == "infeasible" and res.x is None


def test_unknown_option_and_rule():
    m = build(one_unit())
    with pytest.raises(TypeError):
        solve_milp(m, gapp=0.1)
    with pytest.raises(ValueError):
        solve_milp(m, branching="random")


@pytest.mark.parametrize("rule", BRANCHING_RULES)
def test_every_branching_rule_proves_the_same_optimum(rule):
    inst = with_options(small_instance(4, [(3, 2, 4, 1), (1, 0, 2, 3)]), failure_scale=0.5)
    m = build(inst)
    res = solve_milp(m, branching=rule)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(reference(m), abs=1e-6)
    assert verify(m, res.x) == []


def test_node_limit_returns_incumbent_and_gap():
    m = build(fixture("model_A", preset="paper_tables"))
    res = solve_milp(m, node_limit=30)
    assert res.status == "node_limit" and res.stats["limit"] == "nodes"
    assert res.stats["nodes"] <= 31
    if res.x is not None:
        assert verify(m, res.x) == []
        assert res.best_bound <= res.objective + 1e-9
        assert res.gap >= 0


def test_time_limit_reports_as_limit():
    m = build(fixture("model_A", preset="paper_tables"))
    res = solve_milp(m, time_limit=0.2)
    assert res.status == "node_limit" and res.stats["limit"] == "time"


def test_gap_tolerance_is_respected():
    inst = with_options(small_instance(4, [(3, 2, 4, 1), (1, 0, 2, 3)]), failure_scale=0.5)
    m = build(inst)
    exact = solve_milp(m).objective
    loose = solve_milp(m, gap=0.05)
    assert loose.status == "optimal"
    assert exact <= loose.objective <= exact * 1.05 + 1e-6


def _depth_ok(tree):
    bound = {nid: b for nid, _, _, b in tree}
    return all(b >= bound[par] - 1e-9 for nid, par, _, b in tree if par in bound)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_tree_bounds_are_monotone_and_below_optimum(seed):
    inst = random_instance(seed)
    m = build(inst)
    res = solve_milp(m, record_tree=True)
    lp = solve_lp(m)
    if res.status != "optimal":
        assert res.status == "infeasible"
        return
    assert lp.objective <= res.objective + 1e-6
    assert _depth_ok(res.tree)
    # pruned nodes may sit above the optimum; the root never does
    root = [b for nid, par, depth, b in res.tree if depth == 0]
    assert root and root[0] <= res.objective + 1e-6
    assert res.stats["root_bound"] <= res.objective + 1e-6


def test_repeated_runs_are_identical():
    inst = with_options(small_instance(4, [(3, 2, 4, 1), (1, 0, 2, 3)]), failure_scale=0.5)
    runs = [solve_milp(build(inst), record_tree=True) for _ in range(2)]
    assert write_solution(runs[0]) == write_solution(runs[1])
    assert runs[0].tree == runs[1].tree
    assert runs[0].stats["nodes"] == runs[1].stats["nodes"]


def test_solution_document_round_trip():
    m = build(one_unit())
    res = solve_milp(m)
    stats, values = read_solution(write_solution(res))
    assert stats["status"] == "optimal" and float(stats["objective"]) == res.objective
    assert verify(m, values) == []
    assert list(values) == [v.name for v in m.variables]


def test_verify_names_bounds_and_integrality():
    m = MilpModel()
    j = m.add_var("n", "integer", 0, 3)
    m.add_constraint("r", [(j, 1)], "<=", 2)
    assert verify(m, {"n": 2.5}) == ["r", "integrality:n"]
    assert verify(m, {"n": -1.0}) == ["bound:n"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["start_of_period", "paper_literal"]))
def test_matches_reference_solver_on_random_instances(seed, convention):
    inst = random_instance(seed, T=3)
    inst = replace(inst, options=replace(inst.options, age_convention=convention))
    m = build(inst)
    res = solve_milp(m)
    ref = reference(m)
    if ref is None:
        assert res.status == "infeasible"
    else:
        assert res.status == "optimal"
        assert res.objective == pytest.approx(ref, abs=1e-6)


def test_rc_fixing_and_strong_branching_do_not_change_results():
    inst = with_options(small_instance(4, [(3, 2, 4, 1), (1, 0, 2, 3)]), failure_scale=0.5)
    m = build(inst)
    base = solve_milp(m).objective
    for cfg in (SolveConfig(reduced_cost_fixing=False), SolveConfig(strong_candidates=0),
                SolveConfig(reliability=0), SolveConfig(branching="most_fractional")):
        assert solve_milp(m, cfg).objective == pytest.approx(base, abs=1e-6)
    assert math.isfinite(base) and np.isfinite(solve_lp(m).objective)
