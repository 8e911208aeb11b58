"""Dense bounded-variable simplex for ``min c.x, Ax = b, lo <= x <= hi``.

An activity-bound presolve fixes variables forced by single rows. The root
is solved by a two-phase primal simplex with artificial slacks, steepest-edge
style pricing, randomly widened bounds against degeneracy and a switch to
Bland's rule after a run of degenerate pivots. A dual simplex pass removes
the widening afterwards and re-optimizes after bound changes during
branch-and-bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.blas import dger

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

STALL_LIMIT = 50


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None = None
    objective: float = np.inf
    iterations: int = 0


def presolve(A, b, lo, hi, tol=1e-9):
    """Fix variables implied by row activity bounds.

    Returns (lo, hi, active_rows) or None when infeasibility is detected.
    """
    lo = lo.astype(float).copy()
    hi = hi.astype(float).copy()
    active = np.ones(A.shape[0], dtype=bool)
    while True:
        fixed = lo == hi
        rhs = b - A[:, fixed] @ lo[fixed]
        free = ~fixed
        Af = A[:, free]
        lf, hf = lo[free], hi[free]
        with np.errstate(invalid="ignore"):
            lowc = np.where(Af > 0, Af * lf, np.where(Af < 0, Af * hf, 0.0))
            highc = np.where(Af > 0, Af * hf, np.where(Af < 0, Af * lf, 0.0))
        minact = lowc.sum(axis=1)
        maxact = highc.sum(axis=1)
        scale = 1.0 + np.abs(rhs)
        if np.any(active & ((rhs < minact - tol * scale) | (rhs > maxact + tol * scale))):
            return None
        nnz = (Af != 0).sum(axis=1)
        active &= nnz > 0
        at_min = active & (np.abs(rhs - minact) <= tol * scale)
        at_max = active & (np.abs(rhs - maxact) <= tol * scale) & ~at_min
        single = active & (nnz == 1) & ~at_min & ~at_max
        if not (at_min.any() or at_max.any() or single.any()):
            return lo, hi, active
        fcols = np.nonzero(free)[0]
        new_lo, new_hi = lo.copy(), hi.copy()
        assigned: dict[int, float] = {}

        def fix(j, val):
            if assigned.setdefault(j, val) != val:
                return False
            new_lo[j] = new_hi[j] = val
            return True

        for r in np.nonzero(at_min | at_max)[0]:
            for k in np.nonzero(Af[r])[0]:
                j = fcols[k]
                if not fix(j, lo[j] if (Af[r, k] > 0) == bool(at_min[r]) else hi[j]):
                    return None
            active[r] = False
        for r in np.nonzero(single)[0]:
            k = np.nonzero(Af[r])[0][0]
            j = fcols[k]
            val = rhs[r] / Af[r, k]
            if val < lo[j] - tol or val > hi[j] + tol:
                return None
            if not fix(j, min(max(val, lo[j]), hi[j])):
                return None
            active[r] = False
        if np.any(new_lo > new_hi):
            return None
        lo, hi = new_lo, new_hi


class _Tableau:
    """Dense tableau over the structural columns plus a transformed rhs column.

    Basis entries >= n are artificial slacks. Their columns are not stored:
    an artificial that leaves the basis never re-enters and stays at zero.
    Structural bounds are shifted outward by a small random amount while the
    primal simplex runs, which removes nearly all degenerate pivots; the
    shift is removed at the end and a dual simplex pass restores feasibility.
    """

    def __init__(self, T, basis, U, at_upper, tol, seed=0):
        m, n1 = T.shape
        n = n1 - 1
        self.T = T
        self.n = n
        self.basis = basis
        self.U = U
        self.at_upper = at_upper
        self.tol = tol
        self.iterations = 0
        rng = np.random.default_rng(seed)
        pert = (1.0 + rng.random(n)) * 1e-8 * (1.0 + np.where(np.isfinite(U), U, 0.0))
        self.lb = np.concatenate([-pert, np.zeros(m)])
        self.ub = np.concatenate([U + pert, np.full(m, np.inf)])
        self.beta = np.empty(m)
        self.recompute()
        # the basis is the artificial identity, so rows may be negated freely
        flip = self.beta < 0
        self.T[flip] *= -1.0
        self.beta[flip] *= -1.0

    def nonbasic_values(self) -> np.ndarray:
        n = self.n
        val = np.where(self.at_upper[:n], self.ub[:n], self.lb[:n])
        val[self.basis[self.basis < n]] = 0.0
        return val

    def recompute(self):
        self.beta[:] = self.T[:, self.n] - self.T[:, :self.n] @ self.nonbasic_values()

    def unperturb(self):
        n = self.n
        self.lb[:n] = 0.0
        self.ub[:n] = self.U
        self.recompute()

    def artificial_sum(self) -> float:
        return float(self.beta[self.basis >= self.n].sum())

    def pivot(self, r, q):
        T = self.T
        prow = T[r] / T[r, q]
        col = T[:, q].copy()
        col[r] = 0.0
        self.T = T = dger(-1.0, col, prow, a=T, overwrite_a=1)
        T[r] = prow
        self.basis[r] = q
        return prow

    def reduced_costs(self, cost):
        return cost[:self.n] - cost[self.basis] @ self.T[:, :self.n]

    def primal(self, cost, max_iter, stop=None):
        """Bounded primal simplex from a primal feasible basis."""
        n = self.n
        d = self.reduced_costs(cost)
        tol_d = self.tol * max(1.0, float(np.max(np.abs(cost))))
        tol_p = 1e-9
        is_basic = np.zeros(n, dtype=bool)
        degenerate = 0
        bland = False
        while self.iterations < max_iter:
            if stop is not None and stop():
                return OPTIMAL
            is_basic[:] = False
            is_basic[self.basis[self.basis < n]] = True
            score = np.where(self.at_upper[:n], d, -d)
            score[is_basic | (score <= tol_d) | (self.ub[:n] <= self.lb[:n])] = 0.0
            cand = np.nonzero(score)[0]
            if not cand.size:
                return OPTIMAL
            if bland:
                q = int(cand[0])
            else:
                # steepest-edge style scaling on the candidate columns
                Tc = self.T[:, cand]
                w = 1.0 + np.einsum("ij,ij->j", Tc, Tc)
                q = int(cand[np.argmax(score[cand] ** 2 / w)])
            delta = -1.0 if self.at_upper[q] else 1.0
            rate = delta * self.T[:, q]
            theta = self.ub[q] - self.lb[q]
            lb = self.lb[self.basis]
            ub = self.ub[self.basis]
            lim = np.full(len(rate), np.inf)
            pos = rate > tol_p
            lim[pos] = np.maximum(self.beta[pos] - lb[pos], 0.0) / rate[pos]
            neg = (rate < -tol_p) & np.isfinite(ub)
            lim[neg] = np.maximum(ub[neg] - self.beta[neg], 0.0) / -rate[neg]
            r = -1
            best = float(lim.min())
            if best < theta:
                ties = np.nonzero(lim <= best + 1e-12)[0]
                if bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(rate[ties]))])
                theta = best
            if not np.isfinite(theta):
                return UNBOUNDED
            self.iterations += 1
            # Bland's rule after a run of degenerate steps, until progress resumes
            degenerate = degenerate + 1 if theta <= 1e-12 else 0
            bland = degenerate > STALL_LIMIT
            self.beta -= theta * rate
            if r < 0:
                self.at_upper[q] = not self.at_upper[q]
                continue
            leaving = self.basis[r]
            self.at_upper[leaving] = rate[r] < 0
            start = self.ub[q] if self.at_upper[q] else self.lb[q]
            self.at_upper[q] = False
            self.beta[r] = start + delta * theta
            prow = self.pivot(r, q)
            d -= d[q] * prow[:n]
        raise RuntimeError("simplex iteration limit reached")

    def dual(self, cost, max_iter, feas_tol):
        """Bounded dual simplex from a dual feasible basis."""
        n = self.n
        d = self.reduced_costs(cost)
        is_basic = np.zeros(n, dtype=bool)
        while self.iterations < max_iter:
            lb = self.lb[self.basis]
            ub = self.ub[self.basis]
            viol = np.maximum(lb - self.beta, self.beta - ub)
            r = int(np.argmax(viol))
            if viol[r] <= feas_tol:
                return OPTIMAL
            below = self.beta[r] < lb[r]
            target = lb[r] if below else ub[r]
            row = self.T[r, :n]
            is_basic[:] = False
            is_basic[self.basis[self.basis < n]] = True
            up = self.at_upper[:n]
            # columns whose move pushes the basic value toward its bound
            ok = np.where(up, row > 1e-9, row < -1e-9) if below else np.where(up, row < -1e-9, row > 1e-9)
            ok &= ~is_basic & (self.ub[:n] > self.lb[:n])
            cand = np.nonzero(ok)[0]
            if not cand.size:
                return INFEASIBLE
            ratio = np.abs(d[cand]) / np.abs(row[cand])
            best = ratio.min()
            ties = cand[ratio <= best + 1e-12]
            q = int(ties[np.argmax(np.abs(row[ties]))])
            t = (self.beta[r] - target) / row[q]
            self.iterations += 1
            start = self.ub[q] if self.at_upper[q] else self.lb[q]
            self.beta -= t * self.T[:, q]
            leaving = self.basis[r]
            self.at_upper[leaving] = not below
            self.at_upper[q] = False
            self.beta[r] = start + t
            prow = self.pivot(r, q)
            d -= d[q] * prow[:n]
        raise RuntimeError("simplex iteration limit reached")


class LPRelaxation:
    """An LP whose structural bounds can be tightened and re-solved.

    The root is presolved and solved by the primal simplex. Later calls to
    :meth:`resolve` change bounds and restore optimality with the dual simplex,
    starting from a stored basis; the tableau is refactored only when that
    basis differs from the one currently held.
    """

    def __init__(self, c, A, b, lo, hi, hint=None, tol=1e-9, max_iter=200_000):
        self.c = c = np.asarray(c, dtype=float)
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        self.max_iter = max_iter
        self.tab = None
        self.state_id = 0
        self.root = self._root(c, A, b, np.asarray(lo, dtype=float),
                               np.asarray(hi, dtype=float), hint, tol)

    def _root(self, c, A, b, lo, hi, hint, tol) -> LPResult:
        pre = presolve(A, b, lo, hi, tol)
        if pre is None:
            return LPResult(INFEASIBLE)
        lo, hi, rows = pre
        self.lo, self.hi = lo, hi
        free = lo < hi
        x = lo.copy()
        if not free.any() or not rows.any():
            # no coupling left: remaining free columns go to their cheaper bound
            for j in np.nonzero(free)[0]:
                if c[j] < 0:
                    if not np.isfinite(hi[j]):
                        return LPResult(UNBOUNDED)
                    x[j] = hi[j]
            if np.any(np.abs(A @ x - b) > 1e-7 * (1 + np.abs(b))):
                return LPResult(INFEASIBLE)
            return LPResult(OPTIMAL, x, float(c @ x), 0)

        self.cols = cols = np.nonzero(free)[0]
        Ar = A[np.ix_(rows, cols)]
        U = hi[cols] - lo[cols]
        m, n = Ar.shape
        at_upper = np.zeros(n + m, dtype=bool)
        if hint is not None:
            h = np.asarray(hint, dtype=float)[cols] - lo[cols]
            at_upper[:n] = np.isfinite(U) & (h > 0.5 * U)
        rhs = b[rows] - A[np.ix_(rows, ~free)] @ lo[~free] - Ar @ lo[cols]
        T = np.asfortranarray(np.column_stack([Ar, rhs]))
        self.tab = tab = _Tableau(T, np.arange(n, n + m), U, at_upper, tol)
        self.M0 = tab.T.copy(order="F")
        self.cost = np.concatenate([c[cols], np.zeros(m)])
        self.feas_tol = 1e-9 * (1.0 + float(np.abs(b).max(initial=0.0)))

        if tab.artificial_sum() > self.feas_tol:
            phase1 = np.concatenate([np.zeros(n), np.ones(m)])
            tab.primal(phase1, self.max_iter, stop=lambda: tab.artificial_sum() <= self.feas_tol)
            if tab.artificial_sum() > 1e-6 * (1.0 + float(np.abs(b).max(initial=0.0))):
                return LPResult(INFEASIBLE, iterations=tab.iterations)
        tab.ub[n:] = 0.0
        status = tab.primal(self.cost, self.max_iter)
        if status != OPTIMAL:
            return LPResult(status, iterations=tab.iterations)
        tab.unperturb()
        status = tab.dual(self.cost, self.max_iter, self.feas_tol)
        return self._result(status)

    def _result(self, status) -> LPResult:
        tab = self.tab
        if status != OPTIMAL:
            return LPResult(status, iterations=tab.iterations)
        n = tab.n
        y = tab.nonbasic_values()
        structural = tab.basis < n
        y[tab.basis[structural]] = tab.beta[structural]
        x = self.lo.copy()
        x[self.cols] = self.lo[self.cols] + np.clip(y, tab.lb[:n], tab.ub[:n])
        return LPResult(OPTIMAL, x, float(self.c @ x), tab.iterations)

    def state(self):
        """Opaque handle for the current basis."""
        if self.tab is None:
            return None
        self.state_id += 1
        self.current = self.state_id
        return (self.state_id, self.tab.basis.copy(), self.tab.at_upper.copy())

    def _load(self, state):
        sid, basis, at_upper = state
        if sid == getattr(self, "current", None):
            return
        tab = self.tab
        m, n = tab.T.shape[0], tab.n
        B = np.zeros((m, m))
        for r, v in enumerate(basis):
            if v < n:
                B[:, r] = self.M0[:, v]
            else:
                B[v - n, r] = 1.0
        tab.T = np.asfortranarray(lu_solve(lu_factor(B), self.M0))
        tab.basis = basis.copy()
        tab.at_upper = at_upper.copy()
        self.current = sid

    def resolve(self, lo, hi, state) -> LPResult:
        """Optimum under tighter bounds, warm-started from ``state``."""
        if self.root.status != OPTIMAL:
            return self.root
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if np.any(np.maximum(lo, self.lo) > np.minimum(hi, self.hi)):
            return LPResult(INFEASIBLE)
        if self.tab is None:
            return self.root
        self._load(state)
        self.current = None
        tab = self.tab
        n = tab.n
        tab.iterations = 0
        cols = self.cols
        tab.lb[:n] = np.maximum(lo[cols], self.lo[cols]) - self.lo[cols]
        tab.ub[:n] = np.minimum(hi[cols], self.hi[cols]) - self.lo[cols]
        tab.recompute()
        status = tab.dual(self.cost, self.max_iter, self.feas_tol)
        return self._result(status)


def solve_lp(c, A, b, lo, hi, hint=None, tol=1e-9, max_iter=200_000) -> LPResult:
    """Solve the LP; ``hint`` is a point whose bound pattern seeds the start.

    Nonbasic columns start at the bound nearest to ``hint`` and artificial
    slacks absorb the remaining residual. A feasible hint skips phase 1.
    """
    return LPRelaxation(c, A, b, lo, hi, hint, tol, max_iter).root
