"""Linear programming core: model building, bounded simplex with duals, branch and bound."""

from .lpformat import dump_lp
from .milp import solve_milp
from .model import INF, LinearConstraint, ModelError, Problem, Solution, VarHandle
from .simplex import BasisState
from .solve import certificate, dual_of, solve_lp

__all__ = [
    "INF",
    "BasisState",
    "LinearConstraint",
    "ModelError",
    "Problem",
    "Solution",
    "VarHandle",
    "certificate",
    "dual_of",
    "dump_lp",
    "solve_lp",
    "solve_milp",
]
