"""Bounded-variable revised simplex (dual and primal) with dual extraction.

Every row ``lo <= a.x <= hi`` is written as ``a.x - r = 0`` with a logical
variable ``r`` bounded by ``[lo, hi]``, so the working matrix is
``[A | -I | diag(sigma)]`` where the last block holds phase-one
artificials. The basis is kept as a sparse LU of a reference basis plus a
product-form eta file, refactorised every ``REFACTOR_EVERY`` pivots.

Cold starts run the dual simplex from the slack basis (with dual steepest
edge pricing and a small deterministic cost perturbation against stalling),
then a primal pass with the true costs cleans up. When the slack basis is not
dual feasible, a two-phase primal simplex is used instead. Warm starts go
straight to the primal pass.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

log = logging.getLogger(__name__)

PRIMAL_TOL = 1e-7
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
HARRIS_TOL = 1e-9
REFACTOR_EVERY = 80
DEGENERATE_STALL = 150
FEAS_TOL = 1e-9
COST_PERTURB = 1e-6

# nonbasic status codes
BASIC, AT_LOWER, AT_UPPER, FREE = 0, 1, 2, 3


class SingularBasis(RuntimeError):
    pass


class _PhaseOneInfeasible(Exception):
    def __init__(self, status: str, message: str):
        super().__init__(message)
        self.status = status


@dataclass
class BasisState:
    """Warm-start information: column indices in the basis and nonbasic positions."""

    basis: np.ndarray
    state: np.ndarray
    x: np.ndarray
    shape: tuple[int, int]


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray
    y: np.ndarray
    d: np.ndarray
    objective: float
    iterations: int
    basis: BasisState | None
    message: str = ""


class _Factor:
    def __init__(self, B: sp.csc_matrix):
        try:
            self.lu = splu(B, permc_spec="COLAMD", diag_pivot_thresh=0.1,
                           options={"SymmetricMode": False})
        except RuntimeError as exc:
            raise SingularBasis(str(exc)) from exc
        self.etas: list[tuple[int, np.ndarray]] = []

    def ftran(self, a: np.ndarray) -> np.ndarray:
        z = self.lu.solve(a)
        for r, w in self.etas:
            zr = z[r] / w[r]
            if zr != 0.0:
                z -= zr * w
            z[r] = zr
        return z

    def btran(self, c: np.ndarray) -> np.ndarray:
        v = c.copy()
        for r, w in reversed(self.etas):
            v[r] = (v[r] - (w @ v - w[r] * v[r])) / w[r]
        return self.lu.solve(v, trans="T")

    def push(self, r: int, w: np.ndarray) -> None:
        self.etas.append((r, w))


class BoundedSimplex:
    """Solve ``min c.x`` s.t. ``row_lo <= A x <= row_hi``, ``lb <= x <= ub``."""

    def __init__(self, c, A, row_lo, row_hi, lb, ub, max_iter: int | None = None):
        self.n = n = A.shape[1]
        self.m = m = A.shape[0]
        self.c = np.asarray(c, dtype=float)
        self.A = sp.csc_matrix(A, dtype=float)
        self.row_lo = np.asarray(row_lo, dtype=float)
        self.row_hi = np.asarray(row_hi, dtype=float)
        self.lb = np.asarray(lb, dtype=float)
        self.ub = np.asarray(ub, dtype=float)
        self.max_iter = max_iter or (20 * (n + m) + 10000)
        self.total = n + 2 * m
        cscale = float(np.max(np.abs(self.c))) if n else 1.0
        self.dual_tol = DUAL_TOL * max(1.0, cscale)
        self.iterations = 0

    # -- setup -------------------------------------------------------------
    def _assemble(self, sigma: np.ndarray) -> None:
        m, n = self.m, self.n
        eye = sp.identity(m, format="csc")
        self.M = sp.hstack([self.A, -eye, sp.diags(sigma, format="csc")], format="csc")
        self.MT = self.M.T.tocsr()
        self.L = np.concatenate([self.lb, self.row_lo, np.zeros(m)])
        self.U = np.concatenate([self.ub, self.row_hi, np.zeros(m)])

    def _column(self, j: int) -> np.ndarray:
        col = np.zeros(self.m)
        s, e = self.M.indptr[j], self.M.indptr[j + 1]
        col[self.M.indices[s:e]] = self.M.data[s:e]
        return col

    def _refactor(self) -> None:
        self.factor = _Factor(self.M[:, self.basis].tocsc())
        xs = self.x.copy()
        xs[self.basis] = 0.0
        self.x[self.basis] = self.factor.ftran(-(self.M @ xs))

    def _cold_start(self) -> None:
        n, m = self.n, self.m
        x_s = np.where(np.isfinite(self.lb), self.lb, np.where(np.isfinite(self.ub), self.ub, 0.0))
        act = self.A @ x_s
        sigma = np.ones(m)
        art_val = np.zeros(m)
        basis = np.empty(m, dtype=np.int64)
        r_val = act.copy()
        for i in range(m):
            tol = PRIMAL_TOL * (1.0 + abs(act[i]))
            if act[i] < self.row_lo[i] - tol:
                r_val[i] = self.row_lo[i]
            elif act[i] > self.row_hi[i] + tol:
                r_val[i] = self.row_hi[i]
            else:
                basis[i] = n + i
                continue
            diff = r_val[i] - act[i]
            sigma[i] = 1.0 if diff > 0 else -1.0
            art_val[i] = abs(diff)
            basis[i] = n + m + i
        self._assemble(sigma)
        self.x = np.concatenate([x_s, r_val, art_val])
        self.basis = basis
        state = np.empty(self.total, dtype=np.int8)
        state[:] = FREE
        state[np.isfinite(self.L)] = AT_LOWER
        for j in range(self.total):
            if state[j] == AT_LOWER and self.x[j] != self.L[j]:
                state[j] = AT_UPPER
            elif state[j] == FREE and np.isfinite(self.U[j]):
                state[j] = AT_UPPER
        state[basis] = BASIC
        self.state = state
        self.artificial = basis >= n + m
        self.U[n + m:][basis[self.artificial] - n - m] = math.inf

    # -- core loop ---------------------------------------------------------
    def _price(self, cost: np.ndarray, bland: bool):
        y = self.factor.btran(cost[self.basis])
        d = cost - self.MT @ y
        st = self.state
        movable = self.U > self.L
        viol = np.zeros(self.total)
        lo = (st == AT_LOWER) & movable
        up = (st == AT_UPPER) & movable
        fr = st == FREE
        viol[lo] = -d[lo]
        viol[up] = d[up]
        viol[fr] = np.abs(d[fr])
        if bland:
            cand = np.flatnonzero(viol > self.dual_tol)
            q = int(cand[0]) if cand.size else -1
        else:
            q = int(np.argmax(viol))
            if viol[q] <= self.dual_tol:
                q = -1
        return q, y, d

    def _ratio(self, alpha: np.ndarray, q: int, bland: bool):
        xb = self.x[self.basis]
        Lb = self.L[self.basis]
        Ub = self.U[self.basis]
        amax = float(np.max(np.abs(alpha))) if alpha.size else 0.0
        ptol = max(PIVOT_TOL, 1e-11 * amax)
        dec = alpha > ptol
        inc = alpha < -ptol
        ratio = np.full(self.m, math.inf)
        relaxed = np.full(self.m, math.inf)
        mask = dec & np.isfinite(Lb)
        ratio[mask] = (xb[mask] - Lb[mask]) / alpha[mask]
        relaxed[mask] = (xb[mask] - Lb[mask] + HARRIS_TOL) / alpha[mask]
        mask = inc & np.isfinite(Ub)
        ratio[mask] = (Ub[mask] - xb[mask]) / -alpha[mask]
        relaxed[mask] = (Ub[mask] - xb[mask] + HARRIS_TOL) / -alpha[mask]
        np.maximum(ratio, 0.0, out=ratio)
        span = self.U[q] - self.L[q]
        if bland:
            theta = float(np.min(ratio)) if self.m else math.inf
            if span <= theta:
                return -1, span
            if not math.isfinite(theta):
                return -1, math.inf
            ties = np.flatnonzero(ratio <= theta + 1e-14)
            r = int(ties[np.argmin(self.basis[ties])])
            return r, theta
        tmax = float(np.min(relaxed)) if self.m else math.inf
        if span <= tmax:
            return -1, span
        if not math.isfinite(tmax):
            return -1, math.inf
        cand = np.flatnonzero(ratio <= tmax)
        r = int(cand[np.argmax(np.abs(alpha[cand]))])
        return r, float(ratio[r])

    def _run(self, cost: np.ndarray) -> str:
        bland = False
        stall = 0
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iter:
                return "iteration_limit"
            q, y, d = self._price(cost, bland)
            if q < 0:
                return "optimal"
            if self.state[q] == AT_LOWER:
                direction = 1.0
            elif self.state[q] == AT_UPPER:
                direction = -1.0
            else:
                direction = -1.0 if d[q] > 0 else 1.0
            w = self.factor.ftran(self._column(q))
            alpha = direction * w
            r, theta = self._ratio(alpha, q, bland)
            if not math.isfinite(theta):
                return "unbounded"
            self.iterations += 1
            if self.iterations % 2000 == 0 and log.isEnabledFor(logging.DEBUG):
                log.debug("iter %d obj %.9g bland %s stall %d", self.iterations,
                          float(cost @ self.x), bland, stall)
            if theta > 1e-12:
                stall = 0
                bland = False
            else:
                stall += 1
                if stall > DEGENERATE_STALL:
                    bland = True
            if theta > 0.0:
                self.x[self.basis] -= theta * alpha
                self.x[q] += direction * theta
            if r < 0:
                # bound flip, basis unchanged
                if direction > 0:
                    self.x[q], self.state[q] = self.U[q], AT_UPPER
                else:
                    self.x[q], self.state[q] = self.L[q], AT_LOWER
                continue
            p = self.basis[r]
            if alpha[r] > 0:
                self.x[p], self.state[p] = self.L[p], AT_LOWER
            else:
                self.x[p], self.state[p] = self.U[p], AT_UPPER
            self.basis[r] = q
            self.state[q] = BASIC
            self.factor.push(r, w)
            since_refactor += 1
            if since_refactor >= REFACTOR_EVERY:
                self._refactor()
                since_refactor = 0

    # -- dual simplex ----------------------------------------------------------
    def _dual_start(self) -> np.ndarray | None:
        """Slack basis with nonbasics placed for dual feasibility; returns perturbed costs."""
        n, m = self.n, self.m
        self._assemble(np.ones(m))
        self.U[n + m:] = 0.0
        c, lb, ub = self.c, self.lb, self.ub
        fl, fu = np.isfinite(lb), np.isfinite(ub)
        if np.any((c > 0) & ~fl) or np.any((c < 0) & ~fu):
            return None
        state = np.full(self.total, AT_LOWER, dtype=np.int8)
        lower = fl & ((c > 0) | (c == 0))
        upper = ~lower & fu
        free = ~fl & ~fu
        state[:n][upper] = AT_UPPER
        state[:n][free] = FREE
        x = np.zeros(self.total)
        x[:n] = np.where(lower, lb, np.where(upper, ub, 0.0))
        self.basis = np.arange(n, n + m, dtype=np.int64)
        state[self.basis] = BASIC
        self.state = state
        self.x = x
        self.artificial = np.zeros(m, dtype=bool)
        rng = np.random.default_rng(12345)
        bump = COST_PERTURB * (1.0 + np.abs(c)) * rng.uniform(0.5, 1.0, n)
        cost = np.zeros(self.total)
        cost[:n] = c
        moving = ub > lb
        cost[:n] += np.where(lower & moving, bump, np.where(upper & moving, -bump, 0.0))
        return cost

    def _dual(self, cost: np.ndarray) -> str:
        m = self.m
        weights = np.ones(m)
        since_refactor = 0
        mismatches = 0
        y = self.factor.btran(cost[self.basis])
        d = cost - self.MT @ y
        d[self.basis] = 0.0
        movable = self.U > self.L
        while True:
            if self.iterations >= self.max_iter:
                return "iteration_limit"
            xb = self.x[self.basis]
            Lb, Ub = self.L[self.basis], self.U[self.basis]
            below = Lb - xb
            above = xb - Ub
            tol_lo = FEAS_TOL * (1.0 + np.abs(np.where(np.isfinite(Lb), Lb, 0.0)))
            tol_hi = FEAS_TOL * (1.0 + np.abs(np.where(np.isfinite(Ub), Ub, 0.0)))
            infeas = np.where(below > tol_lo, below, np.where(above > tol_hi, above, 0.0))
            if not np.any(infeas > 0.0):
                return "optimal"
            r = int(np.argmax(infeas * infeas / weights))
            to_lower = below[r] > 0
            target = Lb[r] if to_lower else Ub[r]
            e = np.zeros(m)
            e[r] = 1.0
            rho = self.factor.btran(e)
            arow = self.MT @ rho
            st = self.state
            s = -1.0 if to_lower else 1.0
            amax = float(np.max(np.abs(arow)))
            ptol = max(PIVOT_TOL, 1e-11 * amax)
            sa = s * arow
            elig = ((st == AT_LOWER) & movable & (sa > ptol)) \
                | ((st == AT_UPPER) & movable & (sa < -ptol)) \
                | ((st == FREE) & (np.abs(arow) > ptol))
            cand = np.flatnonzero(elig)
            if cand.size == 0:
                return "infeasible"
            dc = d[cand]
            dhat = np.where(st[cand] == AT_LOWER, dc, np.where(st[cand] == AT_UPPER, -dc, np.abs(dc)))
            aabs = np.abs(arow[cand])
            tmax = float(np.min((np.maximum(dhat, 0.0) + self.dual_tol) / aabs))
            near = dhat / aabs <= tmax
            pick = np.flatnonzero(near)
            q = int(cand[pick[np.argmax(aabs[pick])]])
            w = self.factor.ftran(self._column(q))
            alpha_rq = w[r]
            if abs(alpha_rq - arow[q]) > 1e-7 * (1.0 + abs(alpha_rq)) or abs(alpha_rq) <= ptol:
                mismatches += 1
                if mismatches > 20:
                    return "numerical_failure"
                self._refactor()
                since_refactor = 0
                y = self.factor.btran(cost[self.basis])
                d = cost - self.MT @ y
                d[self.basis] = 0.0
                continue
            self.iterations += 1
            if self.iterations % 2000 == 0 and log.isEnabledFor(logging.DEBUG):
                log.debug("dual iter %d infeas %.3g", self.iterations, float(infeas.sum()))
            p = self.basis[r]
            step = (xb[r] - target) / alpha_rq
            self.x[self.basis] -= step * w
            self.x[q] += step
            self.x[p] = target
            theta = d[q] / alpha_rq
            d -= theta * arow
            d[self.basis] = 0.0
            d[q] = 0.0
            d[p] = -theta
            tau = self.factor.ftran(rho)
            beta_r = weights[r]
            ratio = w / alpha_rq
            weights = np.maximum(weights - 2.0 * ratio * tau + ratio * ratio * beta_r, 1e-8)
            weights[r] = max(beta_r / (alpha_rq * alpha_rq), 1e-8)
            self.state[p] = AT_LOWER if to_lower else AT_UPPER
            self.basis[r] = q
            self.state[q] = BASIC
            self.factor.push(r, w)
            since_refactor += 1
            if since_refactor >= REFACTOR_EVERY:
                self._refactor()
                since_refactor = 0
                y = self.factor.btran(cost[self.basis])
                d = cost - self.MT @ y
                d[self.basis] = 0.0

    # -- driver --------------------------------------------------------------
    def solve(self, warm: BasisState | None = None) -> SimplexResult:
        n, m = self.n, self.m
        try:
            started = False
            if warm is not None and warm.shape == (n, m):
                started = self._warm_start(warm)
            if not started:
                perturbed = self._dual_start()
                if perturbed is not None:
                    self._refactor()
                    status = self._dual(perturbed)
                    if status in ("infeasible", "iteration_limit"):
                        return self._result(status, "dual simplex")
                    if status == "optimal":
                        started = True
            if not started:
                self._two_phase_start()
            cost = np.zeros(self.total)
            cost[:n] = self.c
            status = self._run(cost)
            self._refactor()
            return self._result(status)
        except SingularBasis as exc:
            return self._result("numerical_failure", f"singular basis: {exc}")
        except _PhaseOneInfeasible as exc:
            return self._result(exc.status, str(exc))

    def _two_phase_start(self) -> None:
        n, m = self.n, self.m
        self._cold_start()
        self._refactor()
        if np.any(self.artificial):
            cost1 = np.zeros(self.total)
            cost1[n + m:] = 1.0
            status = self._run(cost1)
            if status == "iteration_limit":
                raise _PhaseOneInfeasible(status, "phase one iteration limit")
            self._refactor()
            finite = np.concatenate([self.row_lo, self.row_hi])
            finite = finite[np.isfinite(finite)]
            scale = 1.0 + (float(np.max(np.abs(finite))) if finite.size else 0.0)
            if np.max(self.x[n + m:]) > PRIMAL_TOL * scale:
                raise _PhaseOneInfeasible("infeasible", "phase one optimum is positive")
        # artificials are pinned at zero for phase two
        self.U[n + m:] = 0.0
        self.x[n + m:] = np.where(self.state[n + m:] == BASIC, self.x[n + m:], 0.0)
        self.state[n + m:][self.state[n + m:] != BASIC] = AT_LOWER

    def _warm_start(self, warm: BasisState) -> bool:
        self._assemble(np.ones(self.m))
        self.U[self.n + self.m:] = 0.0
        self.basis = warm.basis.copy()
        self.state = warm.state.copy()
        self.x = warm.x.copy()
        nb = self.state != BASIC
        low = nb & (self.state == AT_LOWER)
        upp = nb & (self.state == AT_UPPER)
        self.x[low] = self.L[low]
        self.x[upp] = self.U[upp]
        # a nonbasic bound that disappeared makes the old state meaningless
        if not (np.all(np.isfinite(self.x[nb]))):
            return False
        try:
            self._refactor()
        except SingularBasis:
            return False
        xb = self.x[self.basis]
        tol = PRIMAL_TOL * (1.0 + np.abs(xb))
        if np.any(xb < self.L[self.basis] - tol) or np.any(xb > self.U[self.basis] + tol):
            return False
        self.artificial = np.zeros(self.m, dtype=bool)
        return True

    def _result(self, status: str, message: str = "") -> SimplexResult:
        n, m = self.n, self.m
        x = self.x[:n].copy()
        y = np.zeros(m)
        d = np.zeros(n)
        basis = None
        if status == "optimal":
            cost = np.zeros(self.total)
            cost[:n] = self.c
            y = self.factor.btran(cost[self.basis])
            d = self.c - self.A.T @ y
            d[self.state[:n] == BASIC] = 0.0
            basis = BasisState(self.basis.copy(), self.state.copy(), self.x.copy(), (n, m))
        obj = float(self.c @ x) if status == "optimal" else math.nan
        return SimplexResult(status, x, y, d, obj, self.iterations, basis, message)


def solve_arrays(c, A, row_lo, row_hi, lb, ub, warm: BasisState | None = None,
                 max_iter: int | None = None) -> SimplexResult:
    """Run the bounded simplex on array data; handles the row-free case directly."""
    c = np.asarray(c, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if np.any(lb > ub):
        n = c.size
        return SimplexResult("infeasible", np.zeros(n), np.zeros(0), np.zeros(n), math.nan, 0, None,
                             "empty variable bounds")
    if A.shape[0] == 0:
        x = np.where(c > 0, lb, np.where(c < 0, ub, np.where(np.isfinite(lb), lb,
                                                              np.where(np.isfinite(ub), ub, 0.0))))
        if not np.all(np.isfinite(x)):
            return SimplexResult("unbounded", np.zeros(c.size), np.zeros(0), c.copy(), math.nan, 0, None)
        return SimplexResult("optimal", x, np.zeros(0), c.copy(), float(c @ x), 0, None)
    return BoundedSimplex(c, A, row_lo, row_hi, lb, ub, max_iter).solve(warm)
