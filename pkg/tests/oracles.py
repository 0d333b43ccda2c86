"""Independent brute-force references used by the test-suite."""

from __future__ import annotations

import itertools
import math

import numpy as np

from h2dso.lpcore import INF, Problem


def vertex_enumeration(c, A, lo, hi, lb, ub, tol=1e-9):
    """Minimum of ``c.x`` over all basic feasible points of a bounded polytope.

    Every candidate vertex is the solution of n linearly independent active
    constraints drawn from row sides and variable bounds. Returns ``None``
    when no feasible vertex exists.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    planes = []
    for i in range(m):
        if math.isfinite(lo[i]):
            planes.append((A[i], lo[i]))
        if math.isfinite(hi[i]) and hi[i] != lo[i]:
            planes.append((A[i], hi[i]))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        if math.isfinite(lb[j]):
            planes.append((e, lb[j]))
        if math.isfinite(ub[j]) and ub[j] != lb[j]:
            planes.append((e, ub[j]))
    if not planes:
        return None
    P = np.array([pl[0] for pl in planes])
    rhs = np.array([pl[1] for pl in planes])
    combos = np.array(list(itertools.combinations(range(len(planes)), n)), dtype=np.int64)
    best = None
    for start in range(0, len(combos), 20000):
        idx = combos[start:start + 20000]
        M = P[idx]
        ok = np.abs(np.linalg.det(M)) > 1e-10
        if not ok.any():
            continue
        M, b = M[ok], rhs[idx[ok]]
        x = np.linalg.solve(M, b[..., None])[..., 0]
        act = x @ A.T
        scale = tol * (1.0 + np.abs(x).max(axis=1, keepdims=True))
        feas = np.all(act >= lo - scale, axis=1) & np.all(act <= hi + scale, axis=1)
        feas &= np.all(x >= lb - scale, axis=1) & np.all(x <= ub + scale, axis=1)
        if feas.any():
            val = float(np.min(x[feas] @ c))
            best = val if best is None else min(best, val)
    return best


def random_lp(rng: np.random.Generator, n_max: int = 6, m_max: int = 8) -> Problem:
    """Random bounded LP, feasible by construction around a random interior point."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    p = Problem("random")
    x0 = rng.uniform(-2, 2, n)
    xs = []
    for j in range(n):
        lo = x0[j] - rng.uniform(0.1, 3)
        hi = x0[j] + rng.uniform(0.1, 3)
        kind = rng.integers(0, 4)
        if kind == 0:
            lo = -INF
        elif kind == 1:
            hi = INF
        xs.append(p.add_var(lo, hi))
    # box rows keep the feasible region bounded even when a variable bound is dropped
    for j in range(n):
        if math.isinf(xs[j].lower) or math.isinf(xs[j].upper):
            p.add_range([(xs[j], 1.0)], x0[j] - 5, x0[j] + 5)
    m = max(1, min(m, m_max - p.num_constraints))
    for i in range(m):
        a = np.round(rng.uniform(-3, 3, n), 2)
        a[rng.random(n) < 0.3] = 0.0
        if not a.any():
            a[rng.integers(n)] = 1.0
        act = float(a @ x0)
        sense = ["<=", ">=", "="][int(rng.integers(0, 3)) if i else int(rng.integers(0, 2))]
        if sense == "<=":
            rhs = act + rng.uniform(0, 2)
        elif sense == ">=":
            rhs = act - rng.uniform(0, 2)
        else:
            rhs = act
        p.add_constraint(list(zip(xs, a)), sense, rhs, f"r{i}")
    p.set_objective(list(zip(xs, np.round(rng.uniform(-5, 5, n), 2))))
    return p


def oracle_objective(p: Problem):
    c, A, lo, hi, lb, ub, _ = p.to_arrays()
    return vertex_enumeration(c, A.toarray(), lo, hi, lb, ub)


def enumerate_binaries(p: Problem, solve):
    """Exhaustive search over every binary assignment, solving the continuous rest."""
    from h2dso.lpcore import solve_lp

    bins = [v for v in p.variables if v.kind == "binary"]
    c, A, lo, hi, lb, ub, is_bin = p.to_arrays()
    best = math.inf
    for pattern in itertools.product((0.0, 1.0), repeat=len(bins)):
        flb, fub = lb.copy(), ub.copy()
        for v, val in zip(bins, pattern):
            flb[v.index] = fub[v.index] = val
        sol = solve_lp(p, _arrays=(c, A, lo, hi, flb, fub, np.zeros_like(is_bin)))
        if sol.optimal:
            best = min(best, sol.objective_value)
    return best
