"""Allocation MILP: formulation, exact solver, brute-force oracle."""

from .bnb import TimeLimit, lp_bound, solve_exact
from .brute import TooLarge, brute_force
from .problem import Infeasible, MilpProblem, formulate, to_lp
from .solution import (
    DEFAULT_TOLERANCE,
    NotATie,
    Optimality,
    Solution,
    canonicalize,
    check_feasibility,
)

__all__ = [
    "DEFAULT_TOLERANCE",
    "Infeasible",
    "MilpProblem",
    "NotATie",
    "Optimality",
    "Solution",
    "TimeLimit",
    "TooLarge",
    "brute_force",
    "canonicalize",
    "check_feasibility",
    "formulate",
    "lp_bound",
    "solve_exact",
    "to_lp",
]
