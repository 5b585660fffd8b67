"""Extended-natural arithmetic and clause systems with a feasibility solver."""
from .arith import (INF, ExtNat, ext_add, ext_arith, ext_compare, ext_mul, format_extnat,
                    is_inf, linear_set_member, parse_extnat)
from .solver import (OVER_N, OVER_NSTAR, ResourceLimitExceeded, SolverError, SolveStats,
                     normalize_mode, solve)
from .system import (OPS, Assignment, Clause, Comparison, LinExpr, System, assignment_from_json,
                     assignment_to_json, check_assignment, clause, cmp, eval_constraint,
                     system_from_json, system_to_json)

__all__ = [
    "INF", "ExtNat", "ext_add", "ext_arith", "ext_compare", "ext_mul", "format_extnat", "is_inf",
    "linear_set_member", "parse_extnat", "OVER_N", "OVER_NSTAR", "ResourceLimitExceeded",
    "SolverError", "SolveStats", "normalize_mode", "solve", "OPS", "Assignment", "Clause",
    "Comparison", "LinExpr", "System", "assignment_from_json", "assignment_to_json",
    "check_assignment", "clause", "cmp", "eval_constraint", "system_from_json", "system_to_json",
]
