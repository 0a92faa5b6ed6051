"""Plans, independent cost recomputation and semantic checks.

Nothing here trusts the solver's auxiliary variables: ages are replayed
from the PM and run decisions, expected failures come from the reliability
tables, and the PM cost is read off the marked interval.  That makes
:func:`cost` and :func:`check` a second opinion on every linearization row.
"""
from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass
from typing import Sequence

from .instance import ProblemInstance
from .model import MilpModel, VarRef
from .reliability import expected_repair_cost, expected_repair_time

__all__ = [
    "Plan",
    "CostBreakdown",
    "EvaluationError",
    "DecodeError",
    "replay_ages",
    "make_plan",
    "decode",
    "cost",
    "check",
    "warnings",
    "cross_evaluate",
    "improvement",
    "to_assignment",
    "plan_to_text",
    "plan_from_text",
    "CSV_HEADER",
    "csv_row",
]

TOL = 1e-6


class EvaluationError(ValueError):
    """The plan cannot be costed (e.g. it breaks inventory balance)."""


class DecodeError(ValueError):
    """A solver result does not describe an integral plan."""


@dataclass(frozen=True)
class Plan:
    """One complete assignment of the decision variables.

    Per-period tuples have length ``T``; per-product ones are ``P x T``.
    ``z[t][l]`` marks a PM at period ``t+1`` closing an interval of
    ``l+1`` periods.  ``a`` holds the model's age variable, so its meaning
    follows the instance's age convention.  The derived tuples ``E`` ...
    ``TRM`` carry whatever the producer reported; the checks compare them
    with recomputed values.
    """

    Z: tuple[int, ...]
    Y: tuple[int, ...]
    a: tuple[int, ...]
    z: tuple[tuple[int, ...], ...]
    y: tuple[tuple[int, ...], ...]
    x: tuple[tuple[float, ...], ...]
    I: tuple[tuple[float, ...], ...]
    B: tuple[tuple[float, ...], ...]
    E: tuple[float, ...]
    CPM: tuple[float, ...]
    CRM: tuple[float, ...]
    TPM: tuple[float, ...]
    TRM: tuple[float, ...]

    @property
    def T(self) -> int:
        return len(self.Z)

    @property
    def P(self) -> int:
        return len(self.x)

    @property
    def pm_periods(self) -> tuple[int, ...]:
        """1-based periods with a PM."""
        return tuple(t + 1 for t, v in enumerate(self.Z) if v)

    def interval(self, t: int) -> int:
        """Marked interval at 1-based period ``t`` (0 when unmarked)."""
        marks = [l + 1 for l, v in enumerate(self.z[t - 1]) if v]
        return marks[0] if marks else 0


@dataclass(frozen=True)
class CostBreakdown:
    production: float
    holding: float
    backorder: float
    setup: float
    pm: float
    corrective: float
    total: float

    @property
    def production_group(self) -> float:
        """Everything that is not maintenance, as grouped in the result tables."""
        return math.fsum((self.production, self.holding, self.backorder, self.setup))


# --- ages and plan construction -------------------------------------------------

def replay_ages(Z: Sequence[int], Y: Sequence[int], convention: str) -> list[int]:
    """Age variable per period from PM and run decisions.

    ``start_of_period``: ``a_t = (a_{t-1} + Y_{t-1}) (1 - Z_t)``, the age at
    the start of ``t``.  ``paper_literal``: ``a_t = (a_{t-1} + Y_t)(1 - Z_t)``.
    Both start from a new machine.
    """
    ages, prev_a, prev_y = [], 0, 0
    for Zt, Yt in zip(Z, Y):
        carried = prev_a + (Yt if convention == "paper_literal" else prev_y)
        a = 0 if Zt else carried
        ages.append(a)
        prev_a, prev_y = a, Yt
    return ages


def _failures(instance: ProblemInstance, age: int, run: int) -> float:
    """Scaled expected failures in a period whose age variable is ``age``."""
    if not run:
        return 0.0
    rates = instance.scaled_failure_rates()
    if age + 1 > len(rates):
        raise EvaluationError(f"age {age} has no failure-table entry")
    return rates[age]


def make_plan(instance: ProblemInstance, pm_periods: Sequence[int], run: Sequence[int],
              production: Sequence[Sequence[float]]) -> Plan:
    """Complete a plan from its primary decisions.

    Parameters
    ----------
    pm_periods : sequence of int
        1-based periods with a PM; intervals are measured from the previous
        PM (or from period 1).
    run : sequence of 0/1
        Machine-run flags ``Y``.
    production : P x T quantities
        Setups are placed exactly where production is positive.
    """
    T, P = instance.horizon, instance.P
    pms = sorted(set(int(t) for t in pm_periods))
    if any(not 1 <= t <= T for t in pms):
        raise EvaluationError(f"PM periods {pms} outside 1..{T}")
    Z = tuple(int(t in pms) for t in range(1, T + 1))
    z = [[0] * T for _ in range(T)]
    prev = 1
    for t in pms:
        if t - prev >= 1:
            z[t - 1][t - prev - 1] = 1
        prev = t
    Y = tuple(int(v) for v in run)
    ages = replay_ages(Z, Y, instance.options.age_convention)
    x = tuple(tuple(float(v) for v in row) for row in production)
    y = tuple(tuple(int(v > 0) for v in row) for row in x)
    I, B = [], []
    for p in range(P):
        net, Ip, Bp = 0.0, [], []
        for t in range(T):
            net += x[p][t] - instance.products[p].demand[t]
            Ip.append(max(net, 0.0))
            Bp.append(max(-net, 0.0))
        I.append(tuple(Ip))
        B.append(tuple(Bp))
    m = instance.machine
    E = tuple(_failures(instance, a, r) if a < T else math.nan for a, r in zip(ages, Y))
    marks = [next((l + 1 for l in range(T) if z[t][l]), 0) for t in range(T)]
    return Plan(
        Z=Z, Y=Y, a=tuple(ages), z=tuple(tuple(r) for r in z), y=y, x=x,
        I=tuple(I), B=tuple(B), E=E,
        CPM=tuple(m.pm_cost[l - 1] if l else 0.0 for l in marks),
        CRM=tuple(expected_repair_cost(e, m.repair_cost) for e in E),
        TPM=tuple(m.pm_time[l - 1] if l else 0.0 for l in marks),
        TRM=tuple(expected_repair_time(e, m.repair_time) for e in E),
    )


# --- decoding ---------------------------------------------------------------------

def decode(result, instance: ProblemInstance, tol: float = TOL) -> Plan:
    """Read a :class:`~prodmaint.milp.SolveResult` back into a :class:`Plan`."""
    if result.x is None or result.status not in ("optimal", "node_limit"):
        raise DecodeError(f"no integral solution to decode (status {result.status})")
    vals = result.values
    T, P = instance.horizon, instance.P

    def get(ref: VarRef, integral: bool):
        try:
            v = vals[ref.name]
        except KeyError:
            raise DecodeError(f"result has no variable {ref.name}") from None
        if integral:
            r = round(v)
            if abs(v - r) > tol:
                raise DecodeError(f"{ref.name} = {v!r} is not integral")
            return int(r)
        return v

    qint = instance.options.integral_quantities

    def pt(kind, integral):
        return tuple(tuple(get(VarRef(kind, p=p, t=t), integral) for t in range(1, T + 1))
                     for p in range(1, P + 1))

    def per_t(kind, integral=False):
        return tuple(get(VarRef(kind, t=t), integral) for t in range(1, T + 1))

    def fl(rows):
        return tuple(tuple(float(v) for v in row) for row in rows)

    return Plan(
        Z=per_t("Z", True), Y=per_t("Y", True), a=per_t("a", True),
        z=tuple(tuple(get(VarRef("z", t=t, l=l), True) for l in range(1, T + 1))
                for t in range(1, T + 1)),
        y=pt("y", True),
        x=fl(pt("x", qint)),
        I=fl(pt("I", qint)),
        B=fl(pt("B", qint)),
        E=per_t("E"), CPM=per_t("CPM"), CRM=per_t("CRM"),
        TPM=per_t("TPM"), TRM=per_t("TRM"),
    )


# --- costing --------------------------------------------------------------------

def _balance_errors(plan: Plan, instance: ProblemInstance, tol: float) -> list[str]:
    out = []
    for p, prod in enumerate(instance.products):
        for t in range(plan.T):
            prev = (plan.I[p][t - 1] - plan.B[p][t - 1]) if t else 0.0
            lhs = plan.I[p][t] - plan.B[p][t]
            rhs = prev + plan.x[p][t] - prod.demand[t]
            if abs(lhs - rhs) > tol:
                out.append(f"eq6_{p + 1}_{t + 1}: net stock {lhs:g} but balance gives {rhs:g}")
    return out


def _compatible(plan: Plan, instance: ProblemInstance):
    if plan.T != instance.horizon or plan.P != instance.P:
        raise EvaluationError(
            f"plan is {plan.P} products x {plan.T} periods, instance is "
            f"{instance.P} x {instance.horizon}")


def cost(plan: Plan, instance: ProblemInstance) -> CostBreakdown:
    """Recompute every objective term of ``plan`` under ``instance``."""
    _compatible(plan, instance)
    bad = _balance_errors(plan, instance, TOL)
    if bad:
        raise EvaluationError("; ".join(bad))
    prods, m = instance.products, instance.machine
    rng = range(plan.T)
    production = math.fsum(prods[p].unit_cost * plan.x[p][t] for p in range(plan.P) for t in rng)
    holding = math.fsum(prods[p].holding_cost * plan.I[p][t] for p in range(plan.P) for t in rng)
    backorder = math.fsum(prods[p].backorder_cost * plan.B[p][t] for p in range(plan.P) for t in rng)
    setup = math.fsum(prods[p].setup_cost * plan.y[p][t] for p in range(plan.P) for t in rng)
    pm = math.fsum(m.pm_cost[plan.interval(t + 1) - 1] for t in rng if plan.interval(t + 1))
    ages = replay_ages(plan.Z, plan.Y, instance.options.age_convention)
    corrective = math.fsum(
        expected_repair_cost(_failures(instance, ages[t], plan.Y[t]), m.repair_cost) for t in rng)
    parts = (production, holding, backorder, setup, pm, corrective)
    return CostBreakdown(*parts, total=math.fsum(parts))


def cross_evaluate(plan: Plan, other: ProblemInstance) -> CostBreakdown:
    """Cost of a fixed plan under another instance's parameters."""
    return cost(plan, other)


def improvement(g_a: float, g_hat_b: float) -> float:
    """``g_a / g_hat_b * 100`` rounded to one decimal."""
    if not g_hat_b > 0:
        raise ValueError("the re-costed objective must be positive")
    return round(g_a / g_hat_b * 100.0, 1)


# --- semantic checks ------------------------------------------------------------

def check(plan: Plan, instance: ProblemInstance, tol: float = TOL) -> list[str]:
    """Violations of the original (nonlinear) relations; empty when sound.

    Each message starts with the name of the row it concerns.
    """
    try:
        _compatible(plan, instance)
    except EvaluationError as exc:
        return [f"shape: {exc}"]
    T, P = plan.T, plan.P
    prods, m = instance.products, instance.machine
    out: list[str] = []

    def binary(name, v):
        if v not in (0, 1):
            out.append(f"binary:{name} = {v}")

    for t in range(T):
        binary(f"Z_{t + 1}", plan.Z[t])
        binary(f"Y_{t + 1}", plan.Y[t])
        for l in range(T):
            binary(f"z_{t + 1}_{l + 1}", plan.z[t][l])
        for p in range(P):
            binary(f"y_{p + 1}_{t + 1}", plan.y[p][t])
    for p in range(P):
        for t in range(T):
            for kind, arr in (("x", plan.x), ("I", plan.I), ("B", plan.B)):
                if arr[p][t] < -tol:
                    out.append(f"bound:{kind}_{p + 1}_{t + 1} is negative")
    out += _balance_errors(plan, instance, tol)

    for p in range(P):
        for t in range(T):
            if plan.x[p][t] > tol and not plan.y[p][t]:
                out.append(f"eq7_{p + 1}_{t + 1}: production without setup")
            if plan.y[p][t] and not plan.Y[t]:
                out.append(f"eq13_{t + 1}: setup while the machine is idle")

    ages = replay_ages(plan.Z, plan.Y, instance.options.age_convention)
    rates = instance.scaled_failure_rates()
    cum = 0
    for t in range(T):
        n = t + 1
        marks = [l + 1 for l in range(T) if plan.z[t][l]]
        if len(marks) > 1:
            out.append(f"eq9_{n}: {len(marks)} interval marks")
        if plan.Z[t] != len(marks):
            out.append(f"eq10_{n}: PM flag {plan.Z[t]} with {len(marks)} interval marks")
        cum += sum(marks)
        if plan.Z[t] and cum != n - 1:
            out.append(f"eq11_{n}: intervals up to period {n} sum to {cum}, expected {n - 1}")
        if plan.a[t] != ages[t]:
            out.append(f"eq12_{n}: age {plan.a[t]} but the recurrence gives {ages[t]}")
        if ages[t] + 1 > len(rates):
            out.append(f"eq14_{n}: age {ages[t]} is beyond the failure table")
            continue
        e_true = rates[ages[t]] * plan.Y[t]
        if abs(plan.E[t] - e_true) > tol:
            out.append(f"eq16_{n}: expected failures {plan.E[t]:g}, recomputed {e_true:g}")
        l = marks[0] if len(marks) == 1 else 0
        cpm = m.pm_cost[l - 1] if l else 0.0
        tpm = m.pm_time[l - 1] if l else 0.0
        trm = expected_repair_time(e_true, m.repair_time)
        if abs(plan.CPM[t] - cpm) > tol:
            out.append(f"eq17_{n}: PM cost {plan.CPM[t]:g}, recomputed {cpm:g}")
        if abs(plan.CRM[t] - expected_repair_cost(e_true, m.repair_cost)) > tol:
            out.append(f"eq18_{n}: repair cost {plan.CRM[t]:g} disagrees with failures")
        if abs(plan.TPM[t] - tpm) > tol:
            out.append(f"eq19_{n}: PM time {plan.TPM[t]:g}, recomputed {tpm:g}")
        if abs(plan.TRM[t] - trm) > tol:
            out.append(f"eq20_{n}: repair time {plan.TRM[t]:g}, recomputed {trm:g}")
        load = math.fsum([prods[p].unit_time * plan.x[p][t] for p in range(P)]
                         + [prods[p].setup_time * plan.y[p][t] for p in range(P)] + [tpm, trm])
        if load > m.capacity + tol:
            out.append(f"eq8_{n}: load {load:g} exceeds capacity {m.capacity:g}")

    if instance.options.periodic:
        gaps = {plan.interval(t + 1) for t in range(T) if plan.Z[t]}
        if len(gaps) > 1:
            out.append(f"eq31: PM intervals {sorted(gaps)} are not a single cycle")
        elif gaps:
            from .builder import periodic_count
            l = gaps.pop()
            if sum(plan.Z) != periodic_count(T, l):
                out.append(f"eq30_{l}: {sum(plan.Z)} PMs, a cycle of {l} needs {periodic_count(T, l)}")
    return out


def warnings(plan: Plan, tol: float = TOL) -> list[str]:
    """Harmless oddities: stock and backlog held together."""
    return [f"I_{p + 1}_{t + 1} and B_{p + 1}_{t + 1} both positive"
            for p in range(plan.P) for t in range(plan.T)
            if plan.I[p][t] > tol and plan.B[p][t] > tol]


# --- plan <-> model assignment -------------------------------------------------

def to_assignment(plan: Plan, model: MilpModel) -> dict[str, float]:
    """Values for every variable of ``model`` implied by ``plan``."""
    T = plan.T
    vals: dict[str, float] = {}
    for v in model.variables:
        ref = v.tag
        if ref is None:
            raise EvaluationError(f"variable {v.name} carries no tag")
        k, p, t, l = ref.kind, ref.p, ref.t, ref.l
        if k in ("x", "I", "B", "y"):
            val = getattr(plan, k)[p - 1][t - 1]
        elif k in ("Z", "Y", "a", "E", "CPM", "CRM", "TPM", "TRM"):
            val = getattr(plan, k)[t - 1]
        elif k == "z":
            val = plan.z[t - 1][l - 1]
        elif k == "w":
            val = int(plan.a[t - 1] + 1 == l)
        elif k == "PL":
            gaps = {plan.interval(s + 1) for s in range(T) if plan.Z[s]}
            cycle = gaps.pop() if len(gaps) == 1 else T  # no PM: the full-horizon cycle
            val = int(l == cycle)
        else:  # pragma: no cover - every kind is handled above
            raise EvaluationError(f"unhandled variable kind {k}")
        vals[v.name] = float(val)
    return vals


# --- text forms -------------------------------------------------------------------

_PER_T = ("Z", "Y", "a", "E", "CPM", "CRM", "TPM", "TRM")
_PER_PT = ("y", "x", "I", "B")


def _fmt(v: float) -> str:
    v = float(v)
    if math.isfinite(v) and v == round(v) and abs(v) < 1e15:
        return str(int(round(v)))
    return repr(v)


def plan_to_text(plan: Plan) -> str:
    """``name = value`` lines under a ``[plan]`` header, variable names as in the model."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    sec = {"T": str(plan.T), "P": str(plan.P)}
    for k in _PER_T:
        for t, v in enumerate(getattr(plan, k), 1):
            sec[f"{k}_{t}"] = _fmt(v)
    for t in range(plan.T):
        for l in range(plan.T):
            sec[f"z_{t + 1}_{l + 1}"] = _fmt(plan.z[t][l])
    for k in _PER_PT:
        for p, row in enumerate(getattr(plan, k), 1):
            for t, v in enumerate(row, 1):
                sec[f"{k}_{p}_{t}"] = _fmt(v)
    cp["plan"] = sec
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def plan_from_text(text: str) -> Plan:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
        sec = cp["plan"]
        T, P = int(sec["T"]), int(sec["P"])
    except (configparser.Error, KeyError, ValueError) as exc:
        raise EvaluationError(f"not a plan document: {exc}") from None

    def num(key, integral):
        try:
            raw = sec[key]
        except KeyError:
            raise EvaluationError(f"plan document misses {key}") from None
        v = float(raw)
        return int(v) if integral else v

    ints = {"Z", "Y", "a", "y"}
    kw = {}
    for k in _PER_T:
        kw[k] = tuple(num(f"{k}_{t}", k in ints) for t in range(1, T + 1))
    kw["z"] = tuple(tuple(num(f"z_{t}_{l}", True) for l in range(1, T + 1)) for t in range(1, T + 1))
    for k in _PER_PT:
        kw[k] = tuple(tuple(num(f"{k}_{p}_{t}", k in ints) for t in range(1, T + 1))
                      for p in range(1, P + 1))
    return Plan(**kw)


CSV_HEADER = "pm,corrective,production,total"


def csv_row(cb: CostBreakdown) -> str:
    """``pm,corrective,production,total`` with production grouping setup and stock costs."""
    return ",".join(_fmt(round(v, 6)) for v in (cb.pm, cb.corrective, cb.production_group, cb.total))

