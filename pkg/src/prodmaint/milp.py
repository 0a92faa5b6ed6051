"""Branch-and-bound MILP solver on top of :mod:`prodmaint.lp`.

Search is best-bound with depth-first plunging.  Both children of a node
are solved right away from the parent's basis; the dive continues into the
one with the smaller bound and the other is queued.  When a dive ends (a
pruned, infeasible or integral child) the open node with the smallest bound
is taken next.

Branching always prefers binary columns over general integers.  Within
that class the default ``pseudocost`` rule scores columns by the product of
their estimated down/up bound gains, learned from every solved child and
seeded by strong branching on columns without history; ``most_fractional``
simply takes the column farthest from integrality.  Every tie is broken by
the lowest column index and no step depends on timing, so a run replays
identically.
"""
from __future__ import annotations

import configparser
import heapq
import io
import math
import time
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .lp import Basis, BoundedSimplex, NumericalError
from .model import MilpModel, ModelError

__all__ = [
    "SolveConfig",
    "SolveResult",
    "solve_lp",
    "solve_milp",
    "verify",
    "write_solution",
    "read_solution",
    "BRANCHING_RULES",
]

BRANCHING_RULES = ("most_fractional", "pseudocost", "kind_priority")

# order used by the ``kind_priority`` rule; unknown kinds go last
KIND_PRIORITY = ("y", "Y", "Z", "z", "PL", "w", "a", "x", "I", "B")


@dataclass
class SolveConfig:
    gap: float = 0.0
    node_limit: int | None = None
    time_limit: float | None = None
    branching: str = "pseudocost"
    int_tol: float = 1e-6
    # absolute pruning slack; objective values closer than this are ties
    abs_tol: float = 1e-6
    record_tree: bool = False
    # tighten integer bounds from LP reduced costs once an incumbent exists
    reduced_cost_fixing: bool = True
    # pseudocost rule: strong-branch at most this many unseen columns per
    # node, until each direction of a column has this many observations
    strong_candidates: int = 16
    reliability: int = 2


@dataclass
class SolveResult:
    status: str
    objective: float = math.nan
    x: np.ndarray | None = None
    best_bound: float = math.nan
    gap: float = math.nan
    stats: dict = field(default_factory=dict)
    names: list[str] = field(default_factory=list)
    tree: list[tuple] | None = None

    @property
    def values(self) -> dict[str, float]:
        if self.x is None:
            return {}
        return {n: float(v) for n, v in zip(self.names, self.x)}

    def value(self, name) -> float:
        key = getattr(name, "name", name)
        return float(self.x[self.names.index(key)])


def _engine(model: MilpModel):
    problems = model.check()
    if problems:
        raise ModelError("; ".join(problems))
    c, A, lo, hi, lb, ub, is_int = model.arrays()
    return BoundedSimplex(c, A, lo, hi), c, lb, ub, is_int


def solve_lp(model: MilpModel) -> SolveResult:
    """Solve the continuous relaxation of ``model``."""
    t0 = time.perf_counter()
    eng, c, lb, ub, _ = _engine(model)
    res = eng.solve(lb, ub)
    stats = {"nodes": 0, "simplex_iterations": res.iterations,
             "wall_time": time.perf_counter() - t0}
    names = [v.name for v in model.variables]
    if res.status != "optimal":
        return SolveResult(res.status, stats=stats, names=names)
    return SolveResult("optimal", res.objective, res.x, res.objective, 0.0, stats, names)


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    depth: int = field(compare=False)
    parent: int = field(compare=False)
    lb: np.ndarray = field(compare=False, repr=False)
    ub: np.ndarray = field(compare=False, repr=False)
    basis: Basis | None = field(compare=False, repr=False)


def _candidates(x, is_int, is_bin, prio, cfg):
    """Fractional columns eligible for branching and their fractional parts."""
    frac = x - np.floor(x)
    dist = np.minimum(frac, 1.0 - frac)
    cand = is_int & (dist > cfg.int_tol)
    if not cand.any():
        return None, frac, dist
    if cfg.branching == "kind_priority":
        pool = cand & (prio == prio[cand].min())
    else:
        # binaries before general integers
        pool = cand & is_bin if (cand & is_bin).any() else cand
    return np.flatnonzero(pool), frac, dist


class _PseudoCosts:
    """Per-column average bound gain per unit change, for each direction."""

    def __init__(self, n):
        self.total = np.zeros((2, n))
        self.count = np.zeros((2, n))

    def record(self, j, side, delta, gain):
        self.total[side, j] += max(gain, 0.0) / delta
        self.count[side, j] += 1

    def estimate(self, idx, side):
        seen = self.count[side] > 0
        fallback = self.total[side, seen].sum() / self.count[side, seen].sum() if seen.any() else 1.0
        cnt = self.count[side, idx]
        return np.where(cnt > 0, self.total[side, idx] / np.maximum(cnt, 1), fallback)


def solve_milp(model: MilpModel, config: SolveConfig | None = None, **overrides) -> SolveResult:
    """Minimize ``model`` exactly by LP-based branch and bound.

    With the default configuration (zero gap, no limits) the returned
    status ``optimal`` certifies global optimality up to ``abs_tol``.
    Keyword overrides replace fields of ``config``.
    """
    cfg = replace(config) if config is not None else SolveConfig()
    for k, v in overrides.items():
        if not hasattr(cfg, k):
            raise TypeError(f"unknown solver option {k!r}")
        setattr(cfg, k, v)
    if cfg.branching not in BRANCHING_RULES:
        raise ValueError(f"unknown branching rule {cfg.branching!r}; choose from {BRANCHING_RULES}")
    t0 = time.perf_counter()
    eng, c, lb0, ub0, is_int = _engine(model)
    n = len(c)
    is_bin = np.array([v.vtype == "binary" for v in model.variables], dtype=bool)
    prio = np.array([
        KIND_PRIORITY.index(v.tag.kind) if v.tag is not None and v.tag.kind in KIND_PRIORITY
        else len(KIND_PRIORITY) for v in model.variables
    ])
    # integer bounds are rounded inwards once; branching keeps them integral
    lb0 = np.where(is_int, np.ceil(lb0 - cfg.int_tol), lb0)
    ub0 = np.where(is_int, np.floor(ub0 + cfg.int_tol), ub0)
    names = [v.name for v in model.variables]
    pcost = _PseudoCosts(n)

    stats = {"nodes": 0, "simplex_iterations": 0, "wall_time": 0.0,
             "root_bound": math.nan, "max_depth": 0, "incumbents": 0,
             "rc_tightened": 0, "strong_branch_lps": 0}
    tree: list[tuple] | None = [] if cfg.record_tree else None
    inc_x: np.ndarray | None = None
    inc_obj = math.inf
    heap: list[_Node] = []

    def lp(lb, ub, basis):
        try:
            r = eng.solve(lb, ub, basis)
        except NumericalError:
            r = eng.solve(lb, ub, None)  # cold restart; raises if still broken
        stats["simplex_iterations"] += r.iterations
        return r

    def finish(status):
        stats["wall_time"] = time.perf_counter() - t0
        open_bounds = [nd.bound for nd in heap if nd.bound < inc_obj - cfg.abs_tol]
        if status == "optimal":
            best = inc_obj
        else:
            best = min(open_bounds + [inc_obj])
        gap = (inc_obj - best) / max(1.0, abs(inc_obj)) if inc_x is not None else math.inf
        return SolveResult(status, inc_obj if inc_x is not None else math.nan, inc_x,
                           best, gap, stats, names, tree)

    def settle(res, bound_floor):
        """Bound of a solved node, or None when it is pruned or integral."""
        nonlocal inc_obj, inc_x
        if res.status == "infeasible":
            return None
        if res.status != "optimal":
            raise NumericalError(f"node relaxation ended with status {res.status}")
        bound = max(res.objective, bound_floor)
        if bound >= inc_obj - _slack(cfg, inc_obj):
            return None
        idx, _, _ = _candidates(res.x, is_int, is_bin, prio, cfg)
        if idx is None:
            x = np.where(is_int, np.round(res.x), res.x)
            obj = model.objective_value(x)
            if obj < inc_obj:
                inc_obj, inc_x = obj, x
                stats["incumbents"] += 1
            return None
        return bound

    def children(j, xj, lb, ub):
        down_ub = ub.copy()
        down_ub[j] = math.floor(xj)
        up_lb = lb.copy()
        up_lb[j] = math.ceil(xj)
        return (lb, down_ub), (up_lb, ub)

    def choose(res, lb, ub):
        """Branching column and its fractional part (``None``: node is infeasible)."""
        idx, frac, dist = _candidates(res.x, is_int, is_bin, prio, cfg)
        if cfg.branching != "pseudocost":
            k = int(idx[np.argmax(dist[idx])])  # argmax keeps the lowest index on ties
            return k, float(frac[k])
        # strong-branch the most fractional columns that have no history yet
        order = idx[np.lexsort((idx, -dist[idx]))]
        fresh = [j for j in order if min(pcost.count[0, j], pcost.count[1, j]) < cfg.reliability]
        for j in fresh[: cfg.strong_candidates]:
            f = float(frac[j])
            outcome = []
            for side, (klb, kub) in enumerate(children(j, res.x[j], lb, ub)):
                kres = lp(klb, kub, res.basis)
                stats["strong_branch_lps"] += 1
                if kres.status == "optimal":
                    pcost.record(j, side, f if side == 0 else 1.0 - f, kres.objective - res.objective)
                outcome.append(kres.status == "optimal" and
                               kres.objective < inc_obj - _slack(cfg, inc_obj))
            if not any(outcome):
                return None
            if not all(outcome):
                return int(j), f  # one side dies at once
        f = frac[idx]
        down = pcost.estimate(idx, 0) * f
        up = pcost.estimate(idx, 1) * (1.0 - f)
        score = np.maximum(down, 1e-6) * np.maximum(up, 1e-6)
        k = int(idx[np.argmax(score)])
        return k, float(frac[k])

    root = lp(lb0, ub0, None)
    stats["nodes"] = 1
    stats["root_bound"] = root.objective if root.status == "optimal" else math.nan
    if root.status in ("infeasible", "unbounded"):
        stats["wall_time"] = time.perf_counter() - t0
        return SolveResult(root.status, stats=stats, names=names, tree=tree)
    if root.status != "optimal":
        raise NumericalError(f"root relaxation ended with status {root.status}")
    if tree is not None:
        tree.append((0, -1, 0, root.objective))

    # the node being expanded: (id, depth, lb, ub, lp result, bound)
    first = settle(root, -math.inf)
    cur = (0, 0, lb0, ub0, root, first) if first is not None else None
    next_id = 1

    while True:
        if cur is None:
            while heap and heap[0].bound >= inc_obj - _slack(cfg, inc_obj):
                heapq.heappop(heap)
            if not heap:
                break
            if inc_x is not None and cfg.gap > 0:
                if (inc_obj - heap[0].bound) <= cfg.gap * max(1.0, abs(inc_obj)):
                    break
            node = heapq.heappop(heap)
            # queued nodes were solved already; re-solving from their own
            # basis is a cheap re-load that recovers x for branching
            res = lp(node.lb, node.ub, node.basis)
            got = settle(res, node.bound)
            if got is None:
                continue
            cur = (node.seq, node.depth, node.lb, node.ub, res, got)
        nid, depth, lb, ub, res, bound = cur
        cur = None
        if _limit_hit(cfg, stats, t0):
            heapq.heappush(heap, _Node(bound, nid, depth, -1, lb, ub, res.basis))
            # both limits report node_limit; stats say which one fired
            stats["limit"] = ("nodes" if cfg.node_limit is not None
                              and stats["nodes"] >= cfg.node_limit else "time")
            return finish("node_limit")
        if cfg.reduced_cost_fixing and inc_x is not None:
            lb, ub, moved = _tighten(lb, ub, res, inc_obj - res.objective, is_int)
            stats["rc_tightened"] += moved
        pick = choose(res, lb, ub)
        if pick is None:
            continue
        j, frac = pick
        kids = list(enumerate(children(j, res.x[j], lb, ub)))
        if frac >= 0.5:
            kids.reverse()  # rounding direction first
        open_kids = []
        for side, (klb, kub) in kids:
            kres = lp(klb, kub, res.basis)
            if kres.status == "optimal":
                pcost.record(j, side, frac if side == 0 else 1.0 - frac, kres.objective - res.objective)
            kid = next_id
            next_id += 1
            stats["nodes"] += 1
            stats["max_depth"] = max(stats["max_depth"], depth + 1)
            if tree is not None:
                kb = max(kres.objective, bound) if kres.status == "optimal" else math.inf
                tree.append((kid, nid, depth + 1, kb))
            got = settle(kres, bound)
            if got is not None:
                open_kids.append((got, len(open_kids), kid, klb, kub, kres))
        if not open_kids:
            continue
        # dive into the child with the better bound; queue the other
        open_kids.sort(key=lambda k: (k[0], k[1]))
        for kb, _, kid, klb, kub, kres in open_kids[1:]:
            heapq.heappush(heap, _Node(kb, kid, depth + 1, nid, klb, kub, kres.basis))
        kb, _, kid, klb, kub, kres = open_kids[0]
        cur = (kid, depth + 1, klb, kub, kres, kb)

    if inc_x is None:
        return finish("infeasible")
    return finish("optimal")


def _slack(cfg: SolveConfig, inc_obj: float) -> float:
    if not math.isfinite(inc_obj):
        return 0.0
    return max(cfg.abs_tol, cfg.gap * max(1.0, abs(inc_obj)))


def _tighten(lb, ub, res, slack, is_int):
    """Reduced-cost bound tightening for the subtree below a node.

    A nonbasic integer column moved ``k`` steps off its bound raises the LP
    bound by at least ``k * |d_j|``; steps that would push it past the
    incumbent can never lead to an improving solution.
    """
    d = res.reduced_costs
    x = res.x
    if d is None or not slack >= 0:
        return lb, ub, 0
    at_lo = is_int & (np.abs(x - lb) <= 1e-9) & (d > 1e-9)
    at_hi = is_int & (np.abs(x - ub) <= 1e-9) & (d < -1e-9)
    if not (at_lo.any() or at_hi.any()):
        return lb, ub, 0
    with np.errstate(divide="ignore", invalid="ignore"):
        steps = np.floor(slack / np.abs(d) + 1e-9)
        new_ub = np.where(at_lo, np.minimum(ub, lb + steps), ub)
        new_lb = np.where(at_hi, np.maximum(lb, ub - steps), lb)
    moved = int(np.sum(new_ub < ub) + np.sum(new_lb > lb))
    return new_lb, new_ub, moved


def _limit_hit(cfg, stats, t0) -> bool:
    if cfg.node_limit is not None and stats["nodes"] >= cfg.node_limit:
        return True
    return cfg.time_limit is not None and time.perf_counter() - t0 > cfg.time_limit


# --- verification -------------------------------------------------------------

def verify(model: MilpModel, assignment: Mapping[str, float] | np.ndarray, tol: float = 1e-6) -> list[str]:
    """Names of rows (and bounds) violated by ``assignment`` beyond ``tol``.

    Row activities are summed with :func:`math.fsum`.
    """
    x = assignment if isinstance(assignment, np.ndarray) else model.vector(assignment)
    out = []
    for con in model.constraints:
        act = math.fsum(a * float(x[j]) for j, a in con.coefs.items())
        lo, hi = con.bounds()
        if act < lo - tol or act > hi + tol:
            out.append(con.name)
    for j, v in enumerate(model.variables):
        xj = float(x[j])
        if xj < v.lb - tol or xj > v.ub + tol:
            out.append(f"bound:{v.name}")
        elif v.is_integer and abs(xj - round(xj)) > tol:
            out.append(f"integrality:{v.name}")
    return out


# --- solution documents ---------------------------------------------------------

def _fmt(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def write_solution(result: SolveResult) -> str:
    """INI-style text: a ``[stats]`` block followed by ``[solution]`` values."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep variable-name case
    st = {"status": result.status}
    if result.x is not None:
        st["objective"] = repr(float(result.objective))
    st["best_bound"] = repr(float(result.best_bound))
    st["gap"] = repr(float(result.gap))
    for k in ("nodes", "simplex_iterations", "incumbents", "max_depth"):
        if k in result.stats:
            st[k] = str(result.stats[k])
    cp["stats"] = st
    if result.x is not None:
        cp["solution"] = {n: _fmt(v) for n, v in zip(result.names, result.x)}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def read_solution(text: str) -> tuple[dict[str, str], dict[str, float]]:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_string(text)
    stats = dict(cp["stats"]) if cp.has_section("stats") else {}
    values = {k: float(v) for k, v in cp["solution"].items()} if cp.has_section("solution") else {}
    return stats, values
