"""Best-first branch and bound over binary variables."""

from __future__ import annotations

import heapq
import itertools
import math

import numpy as np

from .model import Problem, Solution
from .simplex import solve_arrays
from .solve import solve_lp

INT_TOL = 1e-6
DEFAULT_GAP = 1e-4
NODE_CAP = 100_000


def solve_milp(problem: Problem, gap_tol: float = DEFAULT_GAP, node_cap: int = NODE_CAP) -> Solution:
    """Solve a mixed-binary problem.

    Nodes are explored in order of their LP bound; branching picks the most
    fractional binary (lowest index on ties). A dive from the root supplies
    the first incumbent so that pruning starts early and a node-capped
    search still has a feasible answer. The returned solution carries
    the duals of the final LP with every binary fixed at its incumbent
    value (``restricted_duals=True``).
    """
    if gap_tol < 0:
        raise ValueError("gap_tol must be non-negative")
    c, A, lo, hi, lb, ub, is_bin = problem.to_arrays()
    bins = np.flatnonzero(is_bin)
    sign = -1.0 if problem.maximize else 1.0
    if bins.size == 0:
        return solve_lp(problem)

    def relax(node_lb, node_ub):
        return solve_arrays(c, A, lo, hi, node_lb, node_ub)

    counter = itertools.count()
    root = relax(lb, ub)
    nodes = 1
    if root.status != "optimal":
        return Solution(root.status, root.x, root.y, math.nan, nodes=nodes, message=root.message)

    best_x = None
    best_val = math.inf
    dive = _dive(relax, root, lb, ub, bins)
    if dive is not None:
        best_val = dive.objective
        best_x = np.round(dive.x, 12)
        best_x[bins] = np.round(dive.x[bins])
    heap = [(root.objective, next(counter), lb.copy(), ub.copy(), root)]
    bound = root.objective
    limited = False
    while heap:
        bound_here, _, nlb, nub, res = heapq.heappop(heap)
        bound = bound_here
        if best_val < math.inf and _gap(best_val, bound) <= gap_tol:
            break
        if bound_here >= best_val:
            continue
        frac = np.abs(res.x[bins] - np.round(res.x[bins]))
        k = int(np.argmax(frac))
        if frac[k] <= INT_TOL:
            if res.objective < best_val:
                best_val = res.objective
                best_x = np.round(res.x, 12)
                best_x[bins] = np.round(res.x[bins])
            continue
        if nodes >= node_cap:
            limited = True
            heapq.heappush(heap, (bound_here, next(counter), nlb, nub, res))
            break
        j = bins[k]
        for fix in (0.0, 1.0):
            clb, cub = nlb.copy(), nub.copy()
            clb[j] = cub[j] = fix
            child = relax(clb, cub)
            nodes += 1
            if child.status == "optimal" and child.objective < best_val:
                heapq.heappush(heap, (child.objective, next(counter), clb, cub, child))
    if heap:
        bound = min(bound, min(h[0] for h in heap))
    else:
        bound = best_val

    if best_x is None:
        status = "node_limit" if limited else "infeasible"
        return Solution(status, np.zeros(c.size), np.zeros(A.shape[0]), math.nan, nodes=nodes)

    # final LP with binaries fixed gives restricted duals and a clean primal
    flb, fub = lb.copy(), ub.copy()
    flb[bins] = fub[bins] = best_x[bins]
    final = solve_lp(problem, _arrays=(c, A, lo, hi, flb, fub, np.zeros_like(is_bin)))
    gap = _gap(best_val, bound)
    final.gap = gap
    final.nodes = nodes
    final.restricted_duals = True
    if limited and gap > gap_tol:
        final.message = f"node cap reached; achieved gap {gap:.3g}"
    final.status = "optimal" if final.status == "optimal" else final.status
    final.objective_value = sign * float(c @ final.primal) + problem.objective_constant
    return final


def _dive(relax, res, lb, ub, bins):
    """Best of two dives from ``res``; ``None`` when neither reaches an integral point."""
    found = [r for r in (_dive_up(relax, res, lb, ub, bins), _dive_nearest(relax, res, lb, ub, bins))
             if r is not None]
    return min(found, key=lambda r: r.objective) if found else None


def _dive_up(relax, res, lb, ub, bins):
    # switch every fractional binary on; suits commitment-style on/off variables
    lb = lb.copy()
    for _ in range(bins.size + 1):
        frac = np.abs(res.x[bins] - np.round(res.x[bins]))
        if frac.max() <= INT_TOL:
            return res
        lb[bins[frac > INT_TOL]] = 1.0
        res = relax(lb, ub)
        if res.status != "optimal":
            return None
    return None


def _dive_nearest(relax, res, lb, ub, bins):
    # fix the binary nearest to integrality, flipping it when that is infeasible
    lb, ub = lb.copy(), ub.copy()
    for _ in range(bins.size + 1):
        frac = np.abs(res.x[bins] - np.round(res.x[bins]))
        if frac.max() <= INT_TOL:
            return res
        free = (frac > INT_TOL) & (lb[bins] != ub[bins])
        if not free.any():
            return None
        k = int(np.argmin(np.where(free, frac, np.inf)))
        j = bins[k]
        for val in (np.round(res.x[j]), 1.0 - np.round(res.x[j])):
            lb[j] = ub[j] = val
            trial = relax(lb, ub)
            if trial.status == "optimal":
                res = trial
                break
        else:
            return None
    return None


def _gap(incumbent: float, bound: float) -> float:
    if incumbent == math.inf:
        return math.inf
    return max(0.0, incumbent - bound) / max(1.0, abs(incumbent))
