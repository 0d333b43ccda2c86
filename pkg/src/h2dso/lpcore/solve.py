"""Problem-level LP entry points and optimality certificates."""

from __future__ import annotations

import math

import numpy as np

from .model import ModelError, Problem, Solution
from .simplex import BasisState, solve_arrays


def solve_lp(problem: Problem, warm_start: Solution | BasisState | None = None,
             max_iter: int | None = None, *, relax_integrality: bool = False,
             _arrays=None) -> Solution:
    """Solve a continuous LP with the in-house bounded simplex.

    Returns duals for every row (marginal objective change per unit increase
    of the row's right-hand side) and reduced costs for every variable.
    ``warm_start`` takes a previous solution of a problem with the same
    shape; it is used when its basis is still primal feasible.
    """
    c, A, lo, hi, lb, ub, is_bin = _arrays or problem.to_arrays()
    if is_bin.any() and not relax_integrality:
        raise ModelError("solve_lp called on a problem with binary variables; use solve_milp")
    warm = warm_start.basis if isinstance(warm_start, Solution) else warm_start
    res = solve_arrays(c, A, lo, hi, lb, ub, warm=warm, max_iter=max_iter)
    sign = -1.0 if problem.maximize else 1.0
    obj = math.nan
    if res.status == "optimal":
        obj = sign * res.objective + problem.objective_constant
    return Solution(
        status=res.status,
        primal=res.x,
        duals=sign * res.y,
        objective_value=obj,
        reduced_costs=sign * res.d,
        iterations=res.iterations,
        tags=problem.tags,
        basis=res.basis,
        message=res.message,
    )


def dual_of(solution: Solution, tag: str) -> float:
    """Dual value of the row labelled ``tag``.

    For a nodal balance row written as ``supply - withdrawals = demand`` the
    value is the marginal cost of one more unit of demand at that node.
    """
    if not solution.optimal:
        raise ValueError(f"no duals: solution status is {solution.status}")
    try:
        row = solution.tags[tag]
    except KeyError:
        raise KeyError(f"unknown constraint tag {tag!r}") from None
    return float(solution.duals[row])


def certificate(problem: Problem, solution: Solution) -> dict[str, float]:
    """Primal residual, complementary-slackness violation and relative duality gap.

    The dual objective is assembled from the row duals and the variable
    reduced costs, each paired with the bound its sign makes active.
    """
    c, A, lo, hi, lb, ub, _ = problem.to_arrays()
    x = solution.primal
    sign = -1.0 if problem.maximize else 1.0
    y = sign * solution.duals
    d = c - A.T @ y
    act = A @ x
    primal = float(c @ x)
    res = np.concatenate([lo - act, act - hi, lb - x, x - ub, [0.0]])
    dual_obj = 0.0
    dual_inf = 0.0
    slack = 0.0
    for vals, low, high, level in ((y, lo, hi, act), (d, lb, ub, x)):
        pos = vals > 0
        neg = vals < 0
        lo_b = np.where(np.isfinite(low), low, 0.0)
        hi_b = np.where(np.isfinite(high), high, 0.0)
        dual_inf = max(dual_inf,
                       float(np.max(np.abs(vals[pos & ~np.isfinite(low)]), initial=0.0)),
                       float(np.max(np.abs(vals[neg & ~np.isfinite(high)]), initial=0.0)))
        dual_obj += float(vals[pos] @ lo_b[pos] + vals[neg] @ hi_b[neg])
        cs = np.where(pos, np.abs(vals) * np.abs(level - lo_b), 0.0)
        cs = np.where(neg, np.abs(vals) * np.abs(hi_b - level), cs)
        slack = max(slack, float(np.max(cs, initial=0.0)))
    gap = abs(primal - dual_obj) / (1.0 + abs(primal))
    return {
        "primal_residual": float(np.max(res)),
        "dual_infeasibility": dual_inf,
        "complementary_slackness": slack,
        "duality_gap": gap,
    }
