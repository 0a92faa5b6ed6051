"""Exhaustive ground truth for tiny instances.

Every PM schedule and every run pattern is enumerated explicitly.  For each
pair the production quantities are enumerated period by period over all
cumulative-output states ``0 .. total demand`` of every product: the cost of
a period depends only on the state before and after it, so tabulating the
best completion per state visits every integer assignment of ``x`` without
listing the ``O(D^(P*T))`` combinations one by one.  Setups sit exactly
where output is positive (a setup without output only adds cost and load).

The winning plan is re-costed through :func:`prodmaint.evaluator.cost` and
expanded into a full variable assignment of the built model, so callers can
compare it with :func:`prodmaint.milp.solve_milp` row by row.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .builder import build, periodic_count
from .evaluator import cost, make_plan, replay_ages, to_assignment
from .instance import MachineParams, ModelOptions, ProblemInstance, ProductParams, validate
from .milp import SolveResult
from .reliability import WeibullParams

__all__ = ["OracleCaps", "OracleRefusal", "solve_exhaustive", "pm_schedules", "random_instance"]

_TIE = 1e-9


@dataclass(frozen=True)
class OracleCaps:
    max_T: int = 4
    max_P: int = 2
    max_demand: int = 5


class OracleRefusal(ValueError):
    """The instance is outside the enumeration budget."""


def pm_schedules(T: int, periodic: bool = False) -> list[tuple[int, ...]]:
    """Feasible PM period sets in lexicographic order of their 0/1 vectors.

    A PM at period 1 cannot close a positive interval, so only periods
    ``2..T`` are candidates.  With ``periodic`` only full single cycles
    ``1+l, 1+2l, ...`` remain (``l = T`` is the empty schedule).
    """
    if periodic:
        out = {tuple(1 + k * l for k in range(1, periodic_count(T, l) + 1)) for l in range(1, T + 1)}
    else:
        out = {tuple(t for t, on in zip(range(2, T + 1), bits) if on)
               for bits in itertools.product((0, 1), repeat=T - 1)}
    return sorted(out, key=lambda s: tuple(int(t in s) for t in range(1, T + 1)))


def _check_caps(instance: ProblemInstance, caps: OracleCaps):
    problems = validate(instance)
    if problems:
        raise OracleRefusal("invalid instance: " + "; ".join(map(str, problems)))
    if instance.horizon > caps.max_T:
        raise OracleRefusal(f"horizon {instance.horizon} exceeds the cap {caps.max_T}")
    if instance.P > caps.max_P:
        raise OracleRefusal(f"{instance.P} products exceed the cap {caps.max_P}")
    worst = max((d for p in instance.products for d in p.demand), default=0)
    if worst > caps.max_demand:
        raise OracleRefusal(f"demand {worst} exceeds the cap {caps.max_demand}")
    if not instance.options.integral_quantities or any(
            d != int(d) for p in instance.products for d in p.demand):
        raise OracleRefusal("the oracle enumerates integer quantities only")


class _Production:
    """Best production cost given per-period run flags and free capacity."""

    def __init__(self, instance: ProblemInstance):
        prods = instance.products
        self.T = instance.horizon
        self.totals = [int(sum(p.demand)) for p in prods]
        self.cum = [np.cumsum(p.demand) for p in prods]
        self.prods = prods
        # state grid: one axis per product, cumulative output so far
        self.shape = tuple(d + 1 for d in self.totals)
        self.grid = np.indices(self.shape).reshape(len(prods), -1).T  # (S, P)
        self.memo: dict[tuple, tuple[float, list]] = {}

    def _period(self, t: int, free: float, running: bool):
        """Transition cost matrix ``(S_before, S_after)`` for period ``t``."""
        g = self.grid
        out = g[None, :, :] - g[:, None, :]  # output per product
        ok = np.all(out >= 0, axis=2)
        if not running:
            ok &= np.all(out == 0, axis=2)
        c = np.zeros(ok.shape)
        load = np.zeros(ok.shape)
        for p, prod in enumerate(self.prods):
            q = out[:, :, p]
            setup = q > 0
            net = g[None, :, p] - self.cum[p][t]
            c += (prod.unit_cost * q + prod.setup_cost * setup
                  + prod.holding_cost * np.maximum(net, 0) + prod.backorder_cost * np.maximum(-net, 0))
            load += prod.unit_time * q + prod.setup_time * setup
        ok &= load <= free + 1e-9
        return np.where(ok, c, np.inf)

    def solve(self, run: tuple[int, ...], free: tuple[float, ...]):
        key = (run, free)
        if key in self.memo:
            return self.memo[key]
        S = len(self.grid)
        mats = [self._period(t, free[t], bool(run[t])) for t in range(self.T)]
        togo = np.zeros(S)
        tables = []
        for t in reversed(range(self.T)):
            tot = mats[t] + togo[None, :]
            tables.append(tot)
            togo = tot.min(axis=1)
        tables.reverse()
        best = float(togo[0])
        plan = None
        if math.isfinite(best):
            # forward pass: smallest output vector among the optimal moves
            s, plan = 0, []
            for t in range(self.T):
                row = tables[t][s]
                target = row.min()
                # state order is lexicographic in output, so the first hit wins ties
                nxt = int(np.flatnonzero(row <= target + _TIE * max(1.0, abs(target)))[0])
                plan.append(tuple(int(v) for v in self.grid[nxt] - self.grid[s]))
                s = nxt
        self.memo[key] = (best, plan)
        return best, plan


def solve_exhaustive(instance: ProblemInstance, caps: OracleCaps | None = None) -> SolveResult:
    """Global optimum of a small instance by enumeration.

    Refuses (never truncates) instances beyond ``caps``.  Among plans of
    equal cost the one with the lexicographically smallest decision vector
    ``(Z, Y, x by period then product)`` is returned.
    """
    caps = caps or OracleCaps()
    _check_caps(instance, caps)
    T, m = instance.horizon, instance.machine
    rates = instance.scaled_failure_rates()
    conv = instance.options.age_convention
    prod = _Production(instance)
    best_val, best_key = math.inf, None
    for sched in pm_schedules(T, instance.options.periodic):
        Z = tuple(int(t in sched) for t in range(1, T + 1))
        marks = [0] * T
        prev = 1
        for t in sched:
            marks[t - 1] = t - prev
            prev = t
        pm_cost = math.fsum(m.pm_cost[l - 1] for l in marks if l)
        for Y in itertools.product((0, 1), repeat=T):
            ages = replay_ages(Z, Y, conv)
            if any(a + 1 > T for a in ages):
                continue  # no failure-table row for that age
            E = [rates[a] * y for a, y in zip(ages, Y)]
            free = tuple(m.capacity - (m.pm_time[l - 1] if l else 0.0) - m.repair_time * e
                         for l, e in zip(marks, E))
            if any(f < -1e-9 for f in free):
                continue
            val, xs = prod.solve(Y, free)
            if not math.isfinite(val):
                continue
            val = math.fsum([val, pm_cost] + [m.repair_cost * e for e in E])
            if best_key is None or val < best_val - _TIE * max(1.0, abs(best_val)):
                best_val, best_key = val, (sched, Y, xs)

    model = build(instance)
    names = [v.name for v in model.variables]
    stats = {"nodes": 0, "simplex_iterations": 0, "enumerated": True}
    if best_key is None:
        return SolveResult("infeasible", stats=stats, names=names)
    sched, Y, xs = best_key
    production = [[xs[t][p] for t in range(T)] for p in range(instance.P)]
    plan = make_plan(instance, sched, Y, production)
    total = cost(plan, instance).total
    if abs(total - best_val) > 1e-6 * max(1.0, abs(total)):
        raise AssertionError(f"enumeration value {best_val} disagrees with the evaluator {total}")
    x = model.vector(to_assignment(plan, model))
    res = SolveResult("optimal", total, x, total, 0.0, stats, names)
    res.plan = plan  # type: ignore[attr-defined]
    return res


def random_instance(seed: int, *, T: int | None = None, P: int | None = None,
                    caps: OracleCaps | None = None, options: ModelOptions | None = None) -> ProblemInstance:
    """Seeded instance inside ``caps`` with costs scattered around the fixtures.

    Demand is uniform on ``0..max_demand``; every cost and time is drawn
    log-uniformly over one decade centred on the fixture value.
    """
    caps = caps or OracleCaps()
    rng = np.random.default_rng(seed)
    T = T or int(rng.integers(1, caps.max_T + 1))
    P = P or int(rng.integers(1, caps.max_P + 1))

    def around(v):
        return float(np.round(v * 10 ** rng.uniform(-0.5, 0.5), 2))

    products = tuple(
        ProductParams(
            demand=tuple(int(d) for d in rng.integers(0, caps.max_demand + 1, T)),
            holding_cost=around(40), backorder_cost=around(240), setup_cost=around(1000),
            setup_time=around(10), unit_cost=around(90), unit_time=around(3.6),
        )
        for _ in range(P)
    )
    pm_cost = tuple(sorted(around(1500) for _ in range(T)))
    pm_time = tuple(sorted(around(4) for _ in range(T)))
    # capacity between "always binding" and "never binding" for these demands
    need = sum(3.6 * caps.max_demand + 10 for _ in range(P))
    machine = MachineParams(
        capacity=around(need + 15), repair_cost=around(2000), repair_time=around(12),
        pm_cost=pm_cost, pm_time=pm_time,
        failure=WeibullParams(float(rng.uniform(1.0, 3.0)), float(rng.uniform(1.0, 3.0))),
    )
    opts = options or ModelOptions(failure_scale=float(rng.choice([0.5, 1.0])))
    return replace(ProblemInstance(T, products, machine), options=opts)
