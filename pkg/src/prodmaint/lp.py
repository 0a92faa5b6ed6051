"""Bounded-variable revised simplex.

Rows ``lo <= A x <= hi`` are turned into equalities ``A x - s = 0`` with one
logical variable ``s`` per row carrying the row bounds, so every variable
(structural or logical) simply lives in a box.  The basis inverse is kept
explicitly and updated in product form, with a full refactorization every
``refactor_every`` pivots.

Two drivers share the machinery:

* a primal simplex whose phase 1 minimizes the sum of bound violations of
  the basic variables (no artificial columns), and
* a dual simplex used to re-optimize after bound changes, starting from a
  dual feasible basis (branch-and-bound warm starts).
"""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy.linalg.blas import dger

__all__ = ["LPResult", "Basis", "BoundedSimplex", "NumericalError"]

LOWER, UPPER, FREE = 0, 1, 2


class NumericalError(RuntimeError):
    """The basis became too ill-conditioned to trust the answer."""


@dataclass(frozen=True)
class Basis:
    head: tuple[int, ...]
    # nonbasic bound status per column of [A | -I]; ignored for basic columns
    state: bytes


@dataclass
class LPResult:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    objective: float = math.nan
    x: np.ndarray | None = None
    basis: Basis | None = None
    iterations: int = 0
    # per-column reduced costs of the structural variables (optimal only)
    reduced_costs: np.ndarray | None = None


class BoundedSimplex:
    """Simplex engine for ``min c.x  s.t.  lo <= A x <= hi,  lb <= x <= ub``.

    The constraint data is fixed at construction; variable bounds are
    supplied per :meth:`solve` call so that branch-and-bound nodes can share
    one engine.
    """

    def __init__(self, c, A, row_lo, row_hi, *, feas_tol=1e-7, opt_tol=1e-9,
                 pivot_tol=1e-9, refactor_every=50, max_cond=1e13, cache_size=32):
        A = np.asarray(A, dtype=float)
        self.m, self.n = A.shape
        self.N = self.n + self.m
        self.A = np.hstack([A, -np.eye(self.m)])
        self.c = np.concatenate([np.asarray(c, dtype=float), np.zeros(self.m)])
        self.row_lo = np.asarray(row_lo, dtype=float)
        self.row_hi = np.asarray(row_hi, dtype=float)
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.pivot_tol = pivot_tol
        self.refactor_every = refactor_every
        self.max_cond = max_cond
        self.degenerate_limit = 2 * (self.m + self.n)
        # recently returned bases -> (inverse, pivots since refactor); lets a
        # caller come back to a parent basis without refactorizing
        self.cache_size = cache_size
        self._cache: OrderedDict[tuple, tuple[np.ndarray, int]] = OrderedDict()

    # -- state helpers -------------------------------------------------------

    def _setup(self, lb, ub, basis: Basis | None):
        m, n = self.m, self.n
        self.lb = np.concatenate([np.asarray(lb, dtype=float), self.row_lo])
        self.ub = np.concatenate([np.asarray(ub, dtype=float), self.row_hi])
        if basis is None:
            head = np.arange(n, n + m)
            state = np.full(self.N, LOWER, dtype=np.int8)
        else:
            head = np.array(basis.head, dtype=np.int64)
            state = np.frombuffer(basis.state, dtype=np.int8).copy()
        self.head = head
        self.is_basic = np.zeros(self.N, dtype=bool)
        self.is_basic[head] = True
        # place nonbasic columns on a finite bound, honouring the stored side
        lbf, ubf = np.isfinite(self.lb), np.isfinite(self.ub)
        st = np.where(state == UPPER, UPPER, LOWER).astype(np.int8)
        st[(st == UPPER) & ~ubf] = LOWER
        st[(st == LOWER) & ~lbf & ubf] = UPPER
        st[~lbf & ~ubf] = FREE
        self.state = st
        self.x = np.zeros(self.N)
        self._reset_nonbasic_values()
        hit = self._cache.get(basis.head) if basis is not None else None
        if hit is not None:
            self.Binv = hit[0].copy(order="F")
            self.since_refactor = hit[1]
            self._recompute_basic_values()
        else:
            self._refactor()

    def _is_current(self, basis: Basis) -> bool:
        """True when the live factorization already belongs to ``basis``."""
        head = getattr(self, "head", None)
        return head is not None and len(basis.head) == len(head) and tuple(head.tolist()) == basis.head

    def _rebound(self, lb, ub, basis: Basis):
        self.lb = np.concatenate([lb, self.row_lo])
        self.ub = np.concatenate([ub, self.row_hi])
        state = np.frombuffer(basis.state, dtype=np.int8).copy()
        lbf, ubf = np.isfinite(self.lb), np.isfinite(self.ub)
        st = np.where(state == UPPER, UPPER, LOWER).astype(np.int8)
        st[(st == UPPER) & ~ubf] = LOWER
        st[(st == LOWER) & ~lbf & ubf] = UPPER
        st[~lbf & ~ubf] = FREE
        self.state = st
        self._reset_nonbasic_values()
        self._recompute_basic_values()

    def _reset_nonbasic_values(self):
        nb = ~self.is_basic
        x = self.x
        x[nb & (self.state == LOWER)] = self.lb[nb & (self.state == LOWER)]
        x[nb & (self.state == UPPER)] = self.ub[nb & (self.state == UPPER)]
        x[nb & (self.state == FREE)] = 0.0

    def _refactor(self):
        B = self.A[:, self.head]
        try:
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"singular basis: {exc}") from exc
        # 1-norm condition estimate
        cond = np.abs(B).sum(axis=0).max() * np.abs(Binv).sum(axis=0).max()
        if not np.isfinite(cond) or cond > self.max_cond:
            raise NumericalError(f"basis condition estimate {cond:.3g} exceeds {self.max_cond:.0e}")
        # Fortran order so the rank-1 updates can run in place through BLAS
        self.Binv = np.asfortranarray(Binv)
        self.since_refactor = 0
        self._recompute_basic_values()

    def _recompute_basic_values(self):
        xn = self.x.copy()
        xn[self.head] = 0.0
        self.x[self.head] = -self.Binv @ (self.A @ xn)

    def _pivot(self, r, q, alpha):
        """Column ``q`` replaces the basic variable of row ``r``."""
        leaving = self.head[r]
        piv = self.Binv[r] / alpha[r]
        self.Binv = dger(-1.0, alpha, piv, a=self.Binv, overwrite_a=True)
        self.Binv[r] = piv
        self.head[r] = q
        self.is_basic[q] = True
        self.is_basic[leaving] = False
        self.since_refactor += 1
        if self.since_refactor >= self.refactor_every:
            self._refactor()
        return leaving

    def _reduced_costs(self, cost_basic):
        y = cost_basic @ self.Binv
        return self.c - y @ self.A

    def _infeasibility(self):
        xb = self.x[self.head]
        lbB, ubB = self.lb[self.head], self.ub[self.head]
        below = xb < lbB - self.feas_tol
        above = xb > ubB + self.feas_tol
        return below, above

    def _remember(self, key):
        if self.cache_size <= 0:
            return
        self._cache[key] = (self.Binv.copy(order="F"), self.since_refactor)
        self._cache.move_to_end(key)
        while len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)

    def _result(self, status, iters):
        if status != "optimal":
            return LPResult(status, iterations=iters,
                            basis=Basis(tuple(int(h) for h in self.head), self.state.tobytes()))
        x = self.x[: self.n].copy()
        # clip tiny excursions so callers see values inside the box
        x = np.minimum(np.maximum(x, self.lb[: self.n]), self.ub[: self.n])
        d = self._reduced_costs(self.c[self.head])
        obj = math.fsum(self.c[: self.n] * x)
        head = tuple(int(h) for h in self.head)
        self._remember(head)
        return LPResult("optimal", obj, x, Basis(head, self.state.tobytes()),
                        iters, d[: self.n].copy())

    # -- primal --------------------------------------------------------------

    def _primal(self, max_iter):
        iters = 0
        degenerate = 0
        verified = False
        while iters < max_iter:
            below, above = self._infeasibility()
            phase1 = bool(below.any() or above.any())
            if phase1:
                cb = np.where(below, -1.0, np.where(above, 1.0, 0.0))
                y = cb @ self.Binv
                d = -(y @ self.A)
            else:
                d = self._reduced_costs(self.c[self.head])
            nb = ~self.is_basic
            movable = nb & (self.lb < self.ub)
            st = self.state
            inc = movable & (st != UPPER) & (d < -self.opt_tol)
            dec = movable & (st != LOWER) & (d > self.opt_tol)
            cand = np.flatnonzero(inc | dec)
            if cand.size == 0:
                if not verified and self.since_refactor > 0:
                    # confirm on a fresh factorization before declaring victory
                    self._refactor()
                    verified = True
                    continue
                return "infeasible" if phase1 else "optimal", iters
            verified = False
            if degenerate > self.degenerate_limit:
                q = int(cand[0])  # Bland
            else:
                q = int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if inc[q] else -1.0
            alpha = self.Binv @ self.A[:, q]
            delta = -direction * alpha  # change of x_B per unit step
            xb = self.x[self.head]
            lbB, ubB = self.lb[self.head], self.ub[self.head]
            if phase1:
                # infeasible basics may travel up to (and stop at) their violated bound
                lbB, ubB = (np.where(below, -np.inf, np.where(above, ubB, lbB)),
                            np.where(below, lbB, np.where(above, np.inf, ubB)))
            steps = np.full(self.m, np.inf)
            down = delta < -self.pivot_tol
            up = delta > self.pivot_tol
            steps[down] = (xb[down] - lbB[down]) / -delta[down]
            steps[up] = (ubB[up] - xb[up]) / delta[up]
            steps = np.maximum(steps, 0.0)
            flip = self.ub[q] - self.lb[q]
            tmin = steps.min() if self.m else np.inf
            if not np.isfinite(tmin) and not np.isfinite(flip):
                if phase1:
                    raise NumericalError("phase 1 ray without blocking variable")
                return "unbounded", iters
            iters += 1
            if flip <= tmin:
                step = flip
                self.x[q] += direction * step
                self.x[self.head] = xb + delta * step
                self.state[q] = UPPER if direction > 0 else LOWER
                degenerate = 0 if step > 1e-12 else degenerate + 1
                continue
            ties = np.flatnonzero(steps <= tmin + 1e-12)
            if degenerate > self.degenerate_limit:
                r = int(ties[np.argmin(self.head[ties])])
            else:
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
            step = steps[r]
            self.x[q] += direction * step
            self.x[self.head] = xb + delta * step
            leaving = self.head[r]
            hit_lower = delta[r] < 0
            self.x[leaving] = lbB[r] if hit_lower else ubB[r]
            self.state[leaving] = LOWER if self.x[leaving] == self.lb[leaving] else UPPER
            if not np.isfinite(self.lb[leaving]) and not np.isfinite(self.ub[leaving]):
                self.state[leaving] = FREE
            self._pivot(r, q, alpha)
            degenerate = 0 if step > 1e-12 else degenerate + 1
        return "iteration_limit", iters

    # -- dual ----------------------------------------------------------------

    def _make_dual_feasible(self):
        d = self._reduced_costs(self.c[self.head])
        nb = ~self.is_basic
        bad_lo = nb & (self.state == LOWER) & (d < -self.opt_tol) & (self.lb < self.ub)
        bad_up = nb & (self.state == UPPER) & (d > self.opt_tol) & (self.lb < self.ub)
        bad_free = nb & (self.state == FREE) & (np.abs(d) > self.opt_tol)
        if bad_free.any():
            return False
        if (bad_lo & ~np.isfinite(self.ub)).any() or (bad_up & ~np.isfinite(self.lb)).any():
            return False
        if bad_lo.any() or bad_up.any():
            self.state[bad_lo] = UPPER
            self.state[bad_up] = LOWER
            self._reset_nonbasic_values()
            self._recompute_basic_values()
        return True

    def _dual(self, max_iter):
        iters = 0
        degenerate = 0
        d = self._reduced_costs(self.c[self.head])
        while iters < max_iter:
            xb = self.x[self.head]
            lbB, ubB = self.lb[self.head], self.ub[self.head]
            viol = np.maximum(lbB - xb, xb - ubB)
            cand = np.flatnonzero(viol > self.feas_tol)
            if cand.size == 0:
                return "optimal", iters
            if degenerate > self.degenerate_limit:
                r = int(cand[np.argmin(self.head[cand])])
            else:
                r = int(cand[np.argmax(viol[cand])])
            to_lower = xb[r] < lbB[r]
            rho = self.Binv[r]
            alpha_r = rho @ self.A
            nb = ~self.is_basic & (self.lb < self.ub)
            st = self.state
            if to_lower:
                ok = nb & (((st != UPPER) & (alpha_r < -self.pivot_tol)) |
                           ((st != LOWER) & (alpha_r > self.pivot_tol)))
            else:
                ok = nb & (((st != UPPER) & (alpha_r > self.pivot_tol)) |
                           ((st != LOWER) & (alpha_r < -self.pivot_tol)))
            js = np.flatnonzero(ok)
            if js.size == 0:
                return "infeasible", iters
            ratios = np.abs(d[js]) / np.abs(alpha_r[js])
            rmin = ratios.min()
            ties = js[ratios <= rmin + 1e-12]
            if degenerate > self.degenerate_limit:
                q = int(ties[0])
            else:
                q = int(ties[np.argmax(np.abs(alpha_r[ties]))])
            alpha = self.Binv @ self.A[:, q]
            bound = lbB[r] if to_lower else ubB[r]
            theta = (xb[r] - bound) / alpha[r]
            self.x[q] += theta
            self.x[self.head] = xb - alpha * theta
            leaving = self.head[r]
            self.x[leaving] = bound
            self.state[leaving] = LOWER if to_lower else UPPER
            d = d - (d[q] / alpha_r[q]) * alpha_r
            self._pivot(r, q, alpha)
            if self.since_refactor == 0:
                d = self._reduced_costs(self.c[self.head])
            iters += 1
            degenerate = 0 if rmin > 1e-12 else degenerate + 1
        return "iteration_limit", iters

    # -- public --------------------------------------------------------------

    def solve(self, lb, ub, basis: Basis | None = None, max_iter: int = 50_000,
              method: str = "auto") -> LPResult:
        """Optimize for the given variable bounds.

        With a ``basis`` and ``method='auto'`` the dual simplex is tried first
        (valid whenever only bounds changed since that basis was optimal); if
        the basis is not dual feasible, or the dual run stalls, the primal
        simplex takes over from the same basis.
        """
        lb = np.asarray(lb, dtype=float)
        ub = np.asarray(ub, dtype=float)
        if np.any(lb > ub + self.feas_tol):
            return LPResult("infeasible")
        if basis is not None and self._is_current(basis):
            self._rebound(lb, ub, basis)
        elif basis is not None:
            try:
                self._setup(lb, ub, basis)
            except NumericalError:
                basis = None
        if basis is None:
            self._setup(lb, ub, None)
        iters = 0
        if basis is not None and method in ("auto", "dual") and self._make_dual_feasible():
            status, iters = self._dual(max_iter)
            if status == "infeasible":
                return self._result(status, iters)
            if status == "optimal":
                status, more = self._primal(max_iter)  # polishes any drift
                return self._result(status, iters + more)
        status, more = self._primal(max_iter - iters)
        return self._result(status, iters + more)
