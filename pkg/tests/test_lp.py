import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st
from scipy.optimize import linprog

from prodmaint.builder import build
from prodmaint.instance import fixture
from prodmaint.lp import BoundedSimplex
from prodmaint.milp import solve_lp
from prodmaint.model import MilpModel
from conftest import small_instance

INF = math.inf


def one_var(lo, hi):
    m = MilpModel()
    j = m.add_var("x", lb=-INF, ub=INF)
    m.add_constraint("lo", [(j, 1)], ">=", lo)
    m.add_constraint("hi", [(j, 1)], "<=", hi)
    m.set_objective([(j, 1)])
    return m


def test_trivial_lp():
    res = solve_lp(one_var(3, 10))
    assert res.status == "optimal" and res.objective == pytest.approx(3)


def test_contradictory_rows_are_infeasible():
    assert solve_lp(one_var(2, 1)).status == "infeasible"


def test_contradictory_bounds_are_infeasible():
    eng = BoundedSimplex(np.ones(1), np.ones((1, 1)), np.array([-INF]), np.array([INF]))
    assert eng.solve(np.array([2.0]), np.array([1.0])).status == "infeasible"


def test_unbounded():
    m = MilpModel()
    j = m.add_var("x", lb=-INF)
    m.add_constraint("r", [(j, 1)], "<=", 4)
    m.set_objective([(j, 1)])
    assert solve_lp(m).status == "unbounded"


def test_single_product_chain_costs_unit_cost_times_demand():
    # free capacity and stock; backlog is never free, or an unserved horizon costs 0
    inst = small_instance(4, [(3, 1, 4, 2)], capacity=1e6)
    p = inst.products[0]
    inst = replace(inst, products=(replace(p, holding_cost=0, backorder_cost=1e4, setup_cost=0),),
                   machine=replace(inst.machine, repair_cost=0, pm_cost=(0, 0, 0, 0)))
    assert solve_lp(build(inst)).objective == pytest.approx(90 * 10, abs=1e-7)


def _scipy(c, A, lo, hi, lb, ub):
    rows_ub, rhs_ub, rows_eq, rhs_eq = [], [], [], []
    for i in range(A.shape[0]):
        if lo[i] == hi[i]:
            rows_eq.append(A[i]); rhs_eq.append(hi[i])
            continue
        if hi[i] < INF:
            rows_ub.append(A[i]); rhs_ub.append(hi[i])
        if lo[i] > -INF:
            rows_ub.append(-A[i]); rhs_ub.append(-lo[i])
    return linprog(c, A_ub=np.array(rows_ub) if rows_ub else None, b_ub=rhs_ub or None,
                   A_eq=np.array(rows_eq) if rows_eq else None, b_eq=rhs_eq or None,
                   bounds=list(zip(np.where(np.isinf(lb), None, lb), np.where(np.isinf(ub), None, ub))),
                   method="highs")


@st.composite
def lps(draw):
    n = draw(st.integers(1, 6))
    m = draw(st.integers(1, 5))
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    A = rng.integers(-4, 5, size=(m, n)).astype(float)
    c = rng.integers(-5, 6, size=n).astype(float)
    kinds = rng.integers(0, 3, size=m)
    mid = rng.integers(-6, 7, size=m).astype(float)
    lo = np.where(kinds == 1, -INF, mid - np.where(kinds == 2, 0, rng.integers(0, 4, size=m)))
    hi = np.where(kinds == 0, INF, mid + np.where(kinds == 2, 0, rng.integers(0, 4, size=m)))
    lb = np.where(rng.random(n) < 0.2, -INF, rng.integers(-3, 1, size=n)).astype(float)
    ub = np.where(rng.random(n) < 0.3, INF, lb + rng.integers(0, 6, size=n)).astype(float)
    ub = np.where(np.isinf(lb) & np.isinf(ub), 5.0, ub)
    return c, A, lo, hi, lb, ub


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(lps())
def test_agrees_with_reference_solver(problem):
    c, A, lo, hi, lb, ub = problem
    ref = _scipy(c, A, lo, hi, lb, ub)
    res = BoundedSimplex(c, A, lo, hi).solve(lb, ub)
    expected = {0: "optimal", 2: "infeasible", 3: "unbounded"}[ref.status]
    assert res.status == expected
    if expected == "optimal":
        assert res.objective == pytest.approx(ref.fun, abs=1e-6, rel=1e-9)
        x = res.x
        assert np.all(x >= lb - 1e-7) and np.all(x <= ub + 1e-7)
        ax = A @ x
        assert np.all(ax >= lo - 1e-6) and np.all(ax <= hi + 1e-6)


@settings(max_examples=100, deadline=None)
@given(lps(), st.integers(0, 2**31))
def test_warm_start_after_bound_change_matches_cold(problem, seed):
    c, A, lo, hi, lb, ub = problem
    eng = BoundedSimplex(c, A, lo, hi)
    first = eng.solve(lb, ub)
    if first.status != "optimal":
        return
    rng = np.random.default_rng(seed)
    j = int(rng.integers(len(c)))
    lb2, ub2 = lb.copy(), ub.copy()
    if rng.random() < 0.5:
        ub2[j] = math.floor(first.x[j]) - rng.integers(0, 2)
    else:
        lb2[j] = math.ceil(first.x[j]) + rng.integers(0, 2)
    warm = eng.solve(lb2, ub2, basis=first.basis)
    cold = BoundedSimplex(c, A, lo, hi).solve(lb2, ub2)
    assert warm.status == cold.status
    if cold.status == "optimal":
        assert warm.objective == pytest.approx(cold.objective, abs=1e-6, rel=1e-9)


def test_fixture_relaxation_matches_reference():
    model = build(fixture("model_A", preset="paper_tables"))
    c, A, lo, hi, lb, ub, _ = model.arrays()
    ref = _scipy(c, A, lo, hi, lb, ub)
    res = solve_lp(model)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(ref.fun, abs=1e-6)


def test_reduced_costs_certify_optimality():
    model = build(small_instance(3, [(2, 4, 1)]))
    c, A, lo, hi, lb, ub, _ = model.arrays()
    res = BoundedSimplex(c, A, lo, hi).solve(lb, ub)
    d = res.reduced_costs
    at_lb = np.isclose(res.x, lb)
    at_ub = np.isclose(res.x, ub)
    # no improving direction: d >= 0 at lower bounds, d <= 0 at upper bounds
    assert np.all(d[at_lb & ~at_ub] >= -1e-7)
    assert np.all(d[at_ub & ~at_lb] <= 1e-7)
