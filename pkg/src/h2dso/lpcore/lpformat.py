"""Plain-text LP dump (CPLEX-LP flavoured) for checking models against external solvers."""

from __future__ import annotations

import math
import re

from .model import Problem

_SAFE = re.compile(r"[^A-Za-z0-9_.]")


def _name(v) -> str:
    base = _SAFE.sub("_", v.name) if v.name else "x"
    return f"{base}_{v.index}"


def _expr(terms) -> str:
    if not terms:
        return "0 " + "x_dummy"
    parts = []
    for v, a in terms:
        parts.append(f"{'-' if a < 0 else '+'} {abs(a):.17g} {_name(v)}")
    out = " ".join(parts)
    return out[2:] if out.startswith("+ ") else out


def dump_lp(problem: Problem) -> str:
    lines = [f"\\ {problem.name}", "Maximize" if problem.maximize else "Minimize"]
    obj = [(problem.variables[j], a) for j, a in sorted(problem.objective.items())]
    lines.append(f" obj: {_expr(obj)}")
    if problem.objective_constant:
        lines.append(f"\\ objective constant {problem.objective_constant:.17g}")
    lines.append("Subject To")
    for i, con in enumerate(problem.constraints):
        label = _SAFE.sub("_", con.tag) if con.tag else f"c{i}"
        if con.sense == "range":
            lines.append(f" {label}: {con.lower:.17g} <= {_expr(con.terms)} <= {con.rhs:.17g}")
        else:
            lines.append(f" {label}: {_expr(con.terms)} {con.sense} {con.rhs:.17g}")
    lines.append("Bounds")
    binaries = []
    for v in problem.variables:
        if v.kind == "binary":
            binaries.append(_name(v))
            continue
        lower, upper = problem.bounds(v)
        lo = "-inf" if lower == -math.inf else f"{lower:.17g}"
        hi = "+inf" if upper == math.inf else f"{upper:.17g}"
        lines.append(f" {lo} <= {_name(v)} <= {hi}")
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(binaries))
    lines.append("End")
    return "\n".join(lines) + "\n"
