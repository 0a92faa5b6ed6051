"""Linearized production/maintenance MILP.

Rows are named after the relation they encode (``eq6_p_t`` ... ``eq31``) so
an exported model can be audited line by line against the formulation.
Indices in names are 1-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .instance import ProblemInstance, validate
from .model import MilpModel, ModelError, VarRef

__all__ = ["BigMPolicy", "big_m_policy", "build", "add_periodic", "periodic_count"]


@dataclass(frozen=True)
class BigMPolicy:
    m_production: tuple[float, ...]  # per product, setup forcing row
    m_run: float  # machine-run forcing row
    m_interval: float  # PM interval bookkeeping rows
    m_age: float  # age reset rows
    m_failures: float  # expected-failure selection rows


def big_m_policy(instance: ProblemInstance) -> BigMPolicy:
    """Smallest constants that keep every big-M row non-binding when relaxed.

    * production: a product never needs more than its total demand in one
      period;
    * run flag: at most ``P`` products are set up per period;
    * interval and age: both quantities are bounded by the horizon;
    * failures: the largest (scaled) per-period expected failure count.
    """
    T = instance.horizon
    return BigMPolicy(
        m_production=tuple(float(sum(p.demand)) for p in instance.products),
        m_run=float(instance.P),
        m_interval=float(T),
        m_age=float(T),
        m_failures=float(max(instance.scaled_failure_rates())),
    )


def periodic_count(T: int, l: int) -> int:
    """Number of PMs a cycle of length ``l`` fits after the initial one."""
    if l == 1:
        return T - 1
    return math.ceil(T / l - 1)


def build(instance: ProblemInstance, *, periodic: bool | None = None,
          presolve: bool = False, big_m: BigMPolicy | None = None) -> MilpModel:
    """Translate an instance into a :class:`MilpModel`.

    Parameters
    ----------
    instance : ProblemInstance
        Must validate cleanly.
    periodic : bool, optional
        Add the single-cycle rows; defaults to ``instance.options.periodic``.
    presolve : bool
        Fix to zero the columns that the interval and age rows rule out
        anyway (``z[t,l]`` with ``l >= t`` and ``w[t,l]`` beyond the largest
        reachable age). Variable count is unchanged.
    big_m : BigMPolicy, optional
        Override the default constants; each must be at least the default.
    """
    problems = validate(instance)
    if problems:
        raise ModelError("invalid instance: " + "; ".join(map(str, problems)))
    opts = instance.options
    T, P = instance.horizon, instance.P
    prods, mach = instance.products, instance.machine
    tight = big_m_policy(instance)
    M = big_m or tight
    _check_big_m(M, tight)
    e = instance.scaled_failure_rates()
    itype = "integer" if opts.integral_quantities else "continuous"
    literal = opts.age_convention == "paper_literal"

    mdl = MilpModel(name="production_maintenance")
    mdl.meta.update(T=T, P=P, age_convention=opts.age_convention,
                    failure_scale=opts.failure_scale, periodic=False)

    def v(kind, vtype, lb=0.0, ub=math.inf, **idx):
        return mdl.add_var(VarRef(kind, **idx), vtype, lb, ub)

    x, I, B, y = {}, {}, {}, {}
    for p in range(1, P + 1):
        dem = prods[p - 1].demand
        total = float(sum(dem))
        for t in range(1, T + 1):
            x[p, t] = v("x", itype, 0, total, p=p, t=t)
            I[p, t] = v("I", itype, 0, total, p=p, t=t)
            B[p, t] = v("B", itype, 0, float(sum(dem[:t])), p=p, t=t)
            y[p, t] = v("y", "binary", p=p, t=t)
    Y, Z, a, E = {}, {}, {}, {}
    CPM, CRM, TPM, TRM = {}, {}, {}, {}
    z, w = {}, {}
    for t in range(1, T + 1):
        Y[t] = v("Y", "binary", t=t)
        Z[t] = v("Z", "binary", t=t)
        a[t] = v("a", "integer", 0, T, t=t)
        E[t] = v("E", "continuous", t=t)
        CPM[t] = v("CPM", "continuous", t=t)
        CRM[t] = v("CRM", "continuous", t=t)
        TPM[t] = v("TPM", "continuous", t=t)
        TRM[t] = v("TRM", "continuous", t=t)
        # largest age the machine can carry into period t
        reach = t if literal else t - 1
        for l in range(1, T + 1):
            zub = 0.0 if (presolve and l >= t) else 1.0
            wub = 0.0 if (presolve and l > reach + 1) else 1.0
            z[t, l] = v("z", "binary", 0, zub, t=t, l=l)
            w[t, l] = v("w", "binary", 0, wub, t=t, l=l)

    obj = []
    for p in range(1, P + 1):
        pr = prods[p - 1]
        for t in range(1, T + 1):
            obj += [(I[p, t], pr.holding_cost), (B[p, t], pr.backorder_cost),
                    (x[p, t], pr.unit_cost), (y[p, t], pr.setup_cost)]
    for t in range(1, T + 1):
        obj += [(CPM[t], 1.0), (CRM[t], 1.0)]
    mdl.set_objective(obj)

    L = range(1, T + 1)
    for p in range(1, P + 1):
        pr = prods[p - 1]
        for t in range(1, T + 1):
            # inventory balance, starting from empty stock and backlog
            row = [(I[p, t], 1), (B[p, t], -1), (x[p, t], -1)]
            if t > 1:
                row += [(I[p, t - 1], -1), (B[p, t - 1], 1)]
            mdl.add_constraint(f"eq6_{p}_{t}", row, "=", -pr.demand[t - 1])
            mdl.add_constraint(f"eq7_{p}_{t}", [(x[p, t], 1), (y[p, t], -M.m_production[p - 1])], "<=", 0)

    for t in range(1, T + 1):
        row = [(x[p, t], prods[p - 1].unit_time) for p in range(1, P + 1)]
        row += [(y[p, t], prods[p - 1].setup_time) for p in range(1, P + 1)]
        row += [(TPM[t], 1), (TRM[t], 1)]
        mdl.add_constraint(f"eq8_{t}", row, "<=", mach.capacity)
        mdl.add_constraint(f"eq9_{t}", [(z[t, l], 1) for l in L], "<=", 1)
        mdl.add_constraint(f"eq10_{t}", [(Z[t], 1)] + [(z[t, l], -1) for l in L], "=", 0)
        mdl.add_constraint(f"eq13_{t}", [(Y[t], M.m_run)] + [(y[p, t], -1) for p in range(1, P + 1)], ">=", 0)
        mdl.add_constraint(f"eq14_{t}", [(w[t, l], l) for l in L] + [(a[t], -1)], "=", 1)
        mdl.add_constraint(f"eq15_{t}", [(w[t, l], 1) for l in L], "=", 1)
        mdl.add_constraint(f"eq17_{t}", [(CPM[t], 1)] + [(z[t, l], -mach.pm_cost[l - 1]) for l in L], "=", 0)
        mdl.add_constraint(f"eq18_{t}", [(CRM[t], 1), (E[t], -mach.repair_cost)], "=", 0)
        mdl.add_constraint(f"eq19_{t}", [(TPM[t], 1)] + [(z[t, l], -mach.pm_time[l - 1]) for l in L], "=", 0)
        mdl.add_constraint(f"eq20_{t}", [(TRM[t], 1), (E[t], -mach.repair_time)], "=", 0)

        # cumulative PM intervals must reach t-1 whenever a PM is done at t
        cum = [(z[s, l], l) for s in range(1, t + 1) for l in L]
        mi = M.m_interval
        mdl.add_constraint(f"eq21_{t}", cum + [(Z[t], mi)], "<=", t - 1 + mi)
        mdl.add_constraint(f"eq22_{t}", cum + [(Z[t], -mi)], ">=", t - 1 - mi)

        # age recurrence, reset by PM; the carried-in term depends on convention
        if literal:
            carried = [(Y[t], 1)] + ([(a[t - 1], 1)] if t > 1 else [])
        else:
            carried = [(a[t - 1], 1), (Y[t - 1], 1)] if t > 1 else []
        neg = [(j, -c) for j, c in carried]
        ma = M.m_age
        mdl.add_constraint(f"eq23_{t}", [(a[t], 1), (Z[t], ma)], "<=", ma)
        mdl.add_constraint(f"eq24_{t}", [(a[t], 1)] + neg, "<=", 0)
        mdl.add_constraint(f"eq25_{t}", [(a[t], 1)] + neg + [(Z[t], ma)], ">=", 0)

        # expected failures of the selected age, only when the machine runs
        sel = [(w[t, l], -e[l - 1]) for l in L]
        mf = M.m_failures
        mdl.add_constraint(f"eq26_{t}", [(E[t], 1)] + sel + [(Y[t], mf)], "<=", mf)
        mdl.add_constraint(f"eq27_{t}", [(E[t], 1)] + sel + [(Y[t], -mf)], ">=", -mf)
        mdl.add_constraint(f"eq28_{t}", [(E[t], 1), (Y[t], -mf)], "<=", 0)

    want_periodic = opts.periodic if periodic is None else periodic
    if want_periodic:
        add_periodic(mdl, instance)
    return mdl


def _check_big_m(M: BigMPolicy, tight: BigMPolicy):
    pairs = list(zip(M.m_production, tight.m_production))
    pairs += [(M.m_run, tight.m_run), (M.m_interval, tight.m_interval),
              (M.m_age, tight.m_age), (M.m_failures, tight.m_failures)]
    if len(M.m_production) != len(tight.m_production):
        raise ModelError("big-M policy has the wrong number of products")
    for got, need in pairs:
        if not (math.isfinite(got) and got >= 0 and got >= need - 1e-12):
            raise ModelError(f"big-M value {got} is below the valid bound {need}")


def add_periodic(model: MilpModel, instance: ProblemInstance) -> MilpModel:
    """Restrict PMs to a single cycle length (in place; also returned)."""
    if model.meta.get("periodic"):
        raise ModelError("periodic rows already present")
    T = instance.horizon
    PL = {l: model.add_var(VarRef("PL", l=l), "binary") for l in range(1, T + 1)}
    z = lambda t, l: model.index(VarRef("z", t=t, l=l))  # noqa: E731
    # cycle 1: a PM in every period after the first
    model.add_constraint("eq29", [(z(t, 1), 1) for t in range(2, T + 1)] + [(PL[1], -(T - 1))], "=", 0)
    for l in range(2, T + 1):
        row = [(z(t, l), 1) for t in range(1, T + 1)] + [(PL[l], -periodic_count(T, l))]
        model.add_constraint(f"eq30_{l}", row, "=", 0)
    model.add_constraint("eq31", [(PL[l], 1) for l in range(1, T + 1)], "=", 1)
    model.meta["periodic"] = True
    return model
