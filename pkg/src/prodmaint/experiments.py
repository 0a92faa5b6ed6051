"""Scenario solves and the side-by-side reproduction reports.

Each report is a list of rows ``(quantity, published, computed)``. The CSV
form (header ``quantity,paper,computed,delta``) adds the delta and opens with
a comment line naming the model profile, so a number is never shown without
the conventions that produced it.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .builder import build
from .evaluator import CostBreakdown, Plan, check, cost, cross_evaluate, decode, improvement
from .instance import ModelOptions, ProblemInstance, fixture
from .milp import SolveConfig, SolveResult, solve_milp, verify
from .model import VarRef
from .reliability import WeibullParams, failure_table, simulate_nhpp

__all__ = [
    "EXPERIMENTS",
    "PUBLISHED",
    "Profile",
    "Scenario",
    "Report",
    "solve_scenario",
    "reproduce",
    "fig1_svg",
]

EXPERIMENTS = ("table6_7", "table9", "table10", "fig1", "nhpp")

# published values, keyed by report quantity
PUBLISHED: dict[str, object] = {
    "A.pm": 5645, "A.corrective": 4500, "A.production": 48230, "A.total": 58375,
    "A.pm_periods": "2 4 6",
    "B.pm": 8000, "B.corrective": 6000, "B.production": 49630, "B.total": 63630,
    "B.pm_periods": "3 5",
    "B_under_A.pm": 4032, "B_under_A.total": 59662,
    "low.g_A": 60004, "medium.g_A": 54524, "high.g_A": 52042,
    "low.g_B": 63630, "medium.g_B": 63630, "high.g_B": 63630,
    "low.g_hat_B": 60284, "medium.g_hat_B": 57578, "high.g_hat_B": 56574,
    "low.improvement": 99.5, "medium.improvement": 94.7, "high.improvement": 92.0,
    "cyclical.pm": 5645, "cyclical.corrective": 4500, "cyclical.production": 48230,
    "cyclical.total": 58375,
    "periodic.pm": 6048, "periodic.corrective": 4000, "periodic.production": 49630,
    "periodic.total": 59678,
}

_LEVELS = (("low", "dep_low"), ("medium", "dep_medium"), ("high", "dep_high"))


@dataclass(frozen=True)
class Profile:
    """Model options plus the preset name they came from."""

    preset: str = "paper_tables"
    options: ModelOptions = field(default_factory=lambda: ModelOptions(failure_scale=0.5))

    def describe(self) -> str:
        o = self.options
        return (f"preset={self.preset} age_convention={o.age_convention} "
                f"failure_scale={o.failure_scale:g} periodic={str(o.periodic).lower()} "
                f"integral_quantities={str(o.integral_quantities).lower()}")


@dataclass
class Scenario:
    name: str
    instance: ProblemInstance
    result: SolveResult
    plan: Plan | None
    breakdown: CostBreakdown | None
    violations: list[str]
    seconds: float

    @property
    def optimal(self) -> bool:
        return self.result.status == "optimal"


def _apply(instance: ProblemInstance, options: ModelOptions, periodic: bool | None = None) -> ProblemInstance:
    opts = options if periodic is None else replace(options, periodic=periodic)
    return replace(instance, options=opts)


def solve_scenario(name: str, instance: ProblemInstance, config: SolveConfig | None = None,
                   pm_periods: tuple[int, ...] | None = None) -> Scenario:
    """Build, solve, decode, re-cost and check one instance.

    ``pm_periods`` fixes the PM schedule (every ``Z_t``) and leaves the rest
    of the plan to the solver.
    """
    t0 = time.perf_counter()
    model = build(instance, presolve=True)
    if pm_periods is not None:
        for t in range(1, instance.horizon + 1):
            v = model.var(VarRef("Z", t=t))
            v.lb = v.ub = float(t in pm_periods)
    res = solve_milp(model, config or SolveConfig())
    plan = breakdown = None
    problems: list[str] = []
    if res.x is not None:
        problems = verify(model, res.x)
        plan = decode(res, instance)
        problems += check(plan, instance)
        breakdown = cost(plan, instance)
        if abs(breakdown.total - res.objective) > 1e-6:
            problems.append(f"objective {res.objective!r} differs from recomputed total {breakdown.total!r}")
    return Scenario(name, instance, res, plan, breakdown, problems, time.perf_counter() - t0)


def _solve_job(args):
    return solve_scenario(*args)


def _solve_all(jobs: list[tuple], n_jobs: int) -> dict[str, Scenario]:
    if n_jobs <= 1 or len(jobs) <= 1:
        out = [solve_scenario(*j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            out = list(ex.map(_solve_job, jobs))  # map keeps submission order
    for sc in out:
        if sc.result.status in ("infeasible", "unbounded"):
            raise RuntimeError(f"scenario {sc.name} is {sc.result.status}")
    return {sc.name: sc for sc in out}


@dataclass
class Report:
    experiment: str
    profile: Profile
    rows: list[tuple[str, object, object]]
    scenarios: dict[str, Scenario] = field(default_factory=dict)
    svg: str | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {self.experiment}: {self.profile.describe()}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "paper", "computed", "delta"])
        for q, published, got in self.rows:
            w.writerow([q, _cell(published), _cell(got), _delta(published, got)])
        return buf.getvalue()

    def value(self, quantity: str):
        for q, _, got in self.rows:
            if q == quantity:
                return got
        raise KeyError(quantity)

    @property
    def limited(self) -> bool:
        """True when some solve stopped on a limit instead of a proof."""
        return any(sc.result.status != "optimal" for sc in self.scenarios.values())


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isfinite(v) and v == round(v) and abs(v) < 1e15:
            return str(int(round(v)))
        return repr(round(v, 6))
    return str(v)


def _delta(published, got) -> str:
    if published is None or got is None:
        return ""
    if isinstance(published, str) or isinstance(got, str):
        return "match" if str(published) == str(got) else "differ"
    return _cell(float(got) - float(published))


def _cost_rows(prefix: str, sc: Scenario, with_published: bool = True) -> list[tuple]:
    cb = sc.breakdown
    rows = [(f"{prefix}.status", None, sc.result.status)]
    for key, val in (("pm", cb.pm), ("corrective", cb.corrective),
                     ("production", cb.production_group), ("total", cb.total)):
        name = f"{prefix}.{key}"
        rows.append((name, PUBLISHED.get(name) if with_published else None, val))
    name = f"{prefix}.pm_periods"
    rows.append((name, PUBLISHED.get(name) if with_published else None, " ".join(map(str, sc.plan.pm_periods))))
    return rows


def _published_rows(prefix: str, sc: Scenario) -> list[tuple]:
    """Components of the best plan under the published PM schedule."""
    cb = sc.breakdown
    return [
        (f"{prefix}.{k}", PUBLISHED.get(f"{prefix.split('@')[0]}.{k}"), v)
        for k, v in (("pm", cb.pm), ("corrective", cb.corrective),
                     ("production", cb.production_group), ("total", cb.total))
    ]


def reproduce(experiment: str, profile: Profile | None = None, config: SolveConfig | None = None,
              jobs: int = 1, seed: int = 0) -> Report:
    """Run one experiment and compare it with the published numbers."""
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    profile = profile or Profile()
    opts = profile.options

    def inst(name, periodic=None):
        return _apply(fixture(name), opts, periodic)

    if experiment == "table6_7":
        scen = _solve_all([
            ("A", inst("model_A"), config),
            ("B", inst("model_B"), config),
            ("A@published", inst("model_A"), config, (2, 4, 6)),
            ("B@published", inst("model_B"), config, (3, 5)),
        ], jobs)
        a, b = scen["A"], scen["B"]
        rows = _cost_rows("A", a) + _cost_rows("B", b)
        cross = cross_evaluate(b.plan, a.instance)
        rows += [("B_under_A.pm", PUBLISHED["B_under_A.pm"], cross.pm),
                 ("B_under_A.total", PUBLISHED["B_under_A.total"], cross.total)]
        rows += _published_rows("A@published", scen["A@published"])
        rows += _published_rows("B@published", scen["B@published"])
        pub = cross_evaluate(scen["B@published"].plan, a.instance)
        rows += [("B@published_under_A.pm", PUBLISHED["B_under_A.pm"], pub.pm),
                 ("B@published_under_A.total", PUBLISHED["B_under_A.total"], pub.total)]
        return Report(experiment, profile, rows, scen)

    if experiment == "table9":
        work = [("B", inst("model_B"), config)]
        work += [(lvl, inst(name), config) for lvl, name in _LEVELS]
        scen = _solve_all(work, jobs)
        b = scen["B"]
        rows = []
        for lvl, _ in _LEVELS:
            g_a = scen[lvl].breakdown.total
            g_hat = cross_evaluate(b.plan, scen[lvl].instance).total
            rows += [
                (f"{lvl}.status", None, scen[lvl].result.status),
                (f"{lvl}.g_A", PUBLISHED[f"{lvl}.g_A"], g_a),
                (f"{lvl}.g_B", PUBLISHED[f"{lvl}.g_B"], b.breakdown.total),
                (f"{lvl}.g_hat_B", PUBLISHED[f"{lvl}.g_hat_B"], g_hat),
                (f"{lvl}.improvement", PUBLISHED[f"{lvl}.improvement"], improvement(g_a, g_hat)),
                (f"{lvl}.pm_periods", None, " ".join(map(str, scen[lvl].plan.pm_periods))),
            ]
        return Report(experiment, profile, rows, scen)

    if experiment == "table10":
        scen = _solve_all([
            ("cyclical", inst("model_A", periodic=False), config),
            ("periodic", inst("model_A", periodic=True), config),
        ], jobs)
        rows = _cost_rows("cyclical", scen["cyclical"]) + _cost_rows("periodic", scen["periodic"])
        diff = scen["periodic"].breakdown.total - scen["cyclical"].breakdown.total
        rows.append(("periodic_minus_cyclical", PUBLISHED["periodic.total"] - PUBLISHED["cyclical.total"], diff))
        return Report(experiment, profile, rows, scen)

    if experiment == "fig1":
        curves = _fig1_curves()
        rows = []
        for label, (pmc, pmt) in curves.items():
            rows.append((f"{label}.pm_cost_mean", 4000, float(np.mean(pmc))))
            rows.append((f"{label}.pm_time_mean", 4, float(np.mean(pmt))))
            rows.append((f"{label}.pm_cost_increasing", "true",
                         str(bool(np.all(np.diff(pmc) > 0))).lower()))
        return Report(experiment, profile, rows, svg=fig1_svg(curves))

    # nhpp: Monte-Carlo check of the failure table behind every corrective cost
    w = WeibullParams(2.0, 2.0)
    table = failure_table(w, 8)
    rows = []
    for l in range(1, 5):
        mean, se = simulate_nhpp(w, l - 1, l, 200_000, seed=seed + l)
        rows.append((f"e{l}.mean", table[l - 1], mean))
        rows.append((f"e{l}.z_score", None, (mean - table[l - 1]) / se))
    return Report(experiment, profile, rows)


# --- fig1 ----------------------------------------------------------------------

def _fig1_curves() -> dict[str, tuple[tuple[float, ...], tuple[float, ...]]]:
    out = {}
    for label, name in (("model_A", "model_A"), ("high", "dep_high"),
                        ("medium", "dep_medium"), ("low", "dep_low")):
        m = fixture(name).machine
        out[label] = (m.pm_cost, m.pm_time)
    return out


_COLORS = {"model_A": "#1f77b4", "high": "#d62728", "medium": "#ff7f0e", "low": "#2ca02c"}


def fig1_svg(curves: dict[str, tuple[tuple[float, ...], tuple[float, ...]]]) -> str:
    """Two stacked line charts (PM cost, PM time against machine age).

    Plain SVG written by hand: the output depends only on the data, so
    repeated runs are byte-identical.
    """
    W, H, pad = 640, 300, 50
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{2 * H}" '
             f'viewBox="0 0 {W} {2 * H}" font-family="sans-serif" font-size="12">']
    for panel, (title, k) in enumerate((("PM cost by machine age ($)", 0), ("PM time by machine age (h)", 1))):
        y0 = panel * H
        series = {lab: c[k] for lab, c in curves.items()}
        top = max(max(s) for s in series.values())
        n = max(len(s) for s in series.values())

        def px(i, v):
            x = pad + (W - 2 * pad) * i / max(n - 1, 1)
            y = y0 + H - pad - (H - 2 * pad) * v / top
            return f"{x:.1f},{y:.1f}"

        parts.append(f'<text x="{W / 2:.0f}" y="{y0 + 20}" text-anchor="middle">{title}</text>')
        parts.append(f'<line x1="{pad}" y1="{y0 + H - pad}" x2="{W - pad}" y2="{y0 + H - pad}" stroke="black"/>')
        parts.append(f'<line x1="{pad}" y1="{y0 + pad}" x2="{pad}" y2="{y0 + H - pad}" stroke="black"/>')
        for i in range(n):
            x = pad + (W - 2 * pad) * i / max(n - 1, 1)
            parts.append(f'<text x="{x:.1f}" y="{y0 + H - pad + 16}" text-anchor="middle">{i + 1}</text>')
        parts.append(f'<text x="{pad - 6}" y="{y0 + pad + 4}" text-anchor="end">{_cell(float(top))}</text>')
        parts.append(f'<text x="{pad - 6}" y="{y0 + H - pad + 4}" text-anchor="end">0</text>')
        for j, (lab, s) in enumerate(series.items()):
            pts = " ".join(px(i, v) for i, v in enumerate(s))
            col = _COLORS.get(lab, "black")
            parts.append(f'<polyline fill="none" stroke="{col}" stroke-width="2" points="{pts}"/>')
            parts.append(f'<text x="{pad + 10}" y="{y0 + pad + 14 * (j + 1)}" fill="{col}">{lab}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
