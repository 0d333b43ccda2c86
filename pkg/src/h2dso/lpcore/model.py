"""Problem and solution containers for the LP/MILP engine."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse as sp

INF = math.inf

SENSES = ("<=", "=", ">=")


class ModelError(ValueError):
    """Raised for malformed problems (unknown variables, bad bounds, duplicate terms)."""


@dataclass(frozen=True)
class VarHandle:
    index: int
    lower: float = 0.0
    upper: float = INF
    kind: str = "continuous"
    name: str = ""


@dataclass
class LinearConstraint:
    terms: list[tuple[VarHandle, float]]
    sense: str
    rhs: float
    tag: str = ""
    # set only for two-sided rows built with add_range
    lower: float | None = None


@dataclass
class Solution:
    status: str
    primal: np.ndarray
    duals: np.ndarray
    objective_value: float
    reduced_costs: np.ndarray | None = None
    iterations: int = 0
    tags: dict[str, int] = field(default_factory=dict, repr=False)
    # B&B bookkeeping; `restricted_duals` means duals come from the LP with binaries fixed
    gap: float = 0.0
    nodes: int = 0
    restricted_duals: bool = False
    basis: object = field(default=None, repr=False)
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def value(self, var: VarHandle | Iterable[VarHandle]):
        if isinstance(var, VarHandle):
            return float(self.primal[var.index])
        return np.array([self.primal[v.index] for v in var])


class Problem:
    """A linear (mixed-binary) minimisation problem built incrementally.

    Variables are created with :meth:`add_var`; constraints reference them
    through their handles. Each constraint may carry a string tag so that
    its dual can be looked up afterwards with :func:`dual_of`.
    """

    def __init__(self, name: str = "problem", maximize: bool = False):
        self.name = name
        self.maximize = maximize
        self.variables: list[VarHandle] = []
        self.constraints: list[LinearConstraint] = []
        self.objective: dict[int, float] = {}
        self.objective_constant = 0.0
        self._tags: dict[str, int] = {}
        self._bounds: dict[int, tuple[float, float]] = {}

    # -- variables -------------------------------------------------------
    def add_var(self, lower: float = 0.0, upper: float = INF, kind: str = "continuous",
                name: str = "") -> VarHandle:
        if kind not in ("continuous", "binary"):
            raise ModelError(f"unknown variable kind {kind!r}")
        if kind == "binary":
            lower, upper = max(lower, 0.0), min(upper, 1.0)
        if lower > upper:
            raise ModelError(f"variable {name or len(self.variables)}: lower {lower} > upper {upper}")
        v = VarHandle(len(self.variables), float(lower), float(upper), kind, name)
        self.variables.append(v)
        return v

    def add_vars(self, count: int, lower: float = 0.0, upper: float = INF,
                 kind: str = "continuous", name: str = "") -> list[VarHandle]:
        return [self.add_var(lower, upper, kind, f"{name}[{k}]" if name else "") for k in range(count)]

    def set_bounds(self, v: VarHandle, lower: float, upper: float) -> None:
        """Override a variable's bounds; the handle stays valid and keeps its declared bounds."""
        self._check_var(v)
        if lower > upper:
            raise ModelError(f"variable {v.name or v.index}: lower {lower} > upper {upper}")
        self._bounds[v.index] = (float(lower), float(upper))

    def bounds(self, v: VarHandle) -> tuple[float, float]:
        return self._bounds.get(v.index, (v.lower, v.upper))

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def _check_var(self, v: VarHandle) -> None:
        if not isinstance(v, VarHandle) or v.index >= len(self.variables) \
                or self.variables[v.index] is not v:
            raise ModelError(f"unbound variable handle {v!r}")

    # -- constraints -----------------------------------------------------
    def add_constraint(self, terms, sense: str, rhs: float, tag: str = "") -> int:
        if sense not in SENSES:
            raise ModelError(f"unknown sense {sense!r}")
        return self._add_row(terms, sense, float(rhs), tag, None)

    def add_range(self, terms, lower: float, upper: float, tag: str = "") -> int:
        """Two-sided row ``lower <= a.x <= upper``; dual follows the active side."""
        if lower > upper:
            raise ModelError(f"range row {tag!r}: lower {lower} > upper {upper}")
        return self._add_row(terms, "range", float(upper), tag, float(lower))

    def _add_row(self, terms, sense, rhs, tag, lower) -> int:
        if isinstance(terms, dict):
            terms = list(terms.items())
        clean: list[tuple[VarHandle, float]] = []
        seen: set[int] = set()
        for v, a in terms:
            self._check_var(v)
            if v.index in seen:
                raise ModelError(f"variable {v.name or v.index} appears twice in row {tag!r}")
            if not math.isfinite(a):
                raise ModelError(f"non-finite coefficient in row {tag!r}")
            seen.add(v.index)
            if a != 0.0:
                clean.append((v, float(a)))
        if not math.isfinite(rhs):
            raise ModelError(f"non-finite rhs in row {tag!r}")
        row = len(self.constraints)
        if tag:
            if tag in self._tags:
                raise ModelError(f"duplicate constraint tag {tag!r}")
            self._tags[tag] = row
        self.constraints.append(LinearConstraint(clean, sense, rhs, tag, lower))
        return row

    def row_of(self, tag: str) -> int:
        try:
            return self._tags[tag]
        except KeyError:
            raise KeyError(f"unknown constraint tag {tag!r}") from None

    @property
    def tags(self) -> dict[str, int]:
        return dict(self._tags)

    # -- objective -------------------------------------------------------
    def set_objective(self, terms, constant: float = 0.0) -> None:
        self.objective = {}
        self.objective_constant = float(constant)
        self.add_objective(terms)

    def add_objective(self, terms, constant: float = 0.0) -> None:
        if isinstance(terms, dict):
            terms = terms.items()
        for v, a in terms:
            self._check_var(v)
            self.objective[v.index] = self.objective.get(v.index, 0.0) + float(a)
        self.objective_constant += float(constant)

    # -- array form ------------------------------------------------------
    def to_arrays(self):
        """Return ``(c, A, row_lo, row_hi, lb, ub, is_binary)`` in minimisation form."""
        n = len(self.variables)
        m = len(self.constraints)
        c = np.zeros(n)
        for j, a in self.objective.items():
            c[j] = a
        if self.maximize:
            c = -c
        rows, cols, vals = [], [], []
        lo = np.empty(m)
        hi = np.empty(m)
        for i, con in enumerate(self.constraints):
            for v, a in con.terms:
                rows.append(i)
                cols.append(v.index)
                vals.append(a)
            if con.sense == "<=":
                lo[i], hi[i] = -INF, con.rhs
            elif con.sense == ">=":
                lo[i], hi[i] = con.rhs, INF
            elif con.sense == "=":
                lo[i] = hi[i] = con.rhs
            else:
                lo[i], hi[i] = con.lower, con.rhs
        A = sp.csc_matrix((vals, (rows, cols)), shape=(m, n))
        lb = np.array([v.lower for v in self.variables], dtype=float)
        ub = np.array([v.upper for v in self.variables], dtype=float)
        for j, (a, b) in self._bounds.items():
            lb[j], ub[j] = a, b
        is_bin = np.array([v.kind == "binary" for v in self.variables], dtype=bool)
        return c, A, lo, hi, lb, ub, is_bin

    def evaluate(self, x: np.ndarray) -> float:
        val = self.objective_constant + sum(a * x[j] for j, a in self.objective.items())
        return float(val)

    def max_violation(self, x: np.ndarray) -> float:
        """Largest absolute row or bound violation of point ``x``."""
        _, A, lo, hi, lb, ub, _ = self.to_arrays()
        act = A @ x
        viol = np.concatenate([lo - act, act - hi, lb - x, x - ub, [0.0]])
        return float(np.max(viol))
