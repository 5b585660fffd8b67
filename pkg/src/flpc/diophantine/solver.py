"""Feasibility of clause systems over N and N*.

The N* layer is the same for every backend: a solution picks a set S of
variables that take the value INF, every comparison side is classified as
INF or FIN, INF-involving comparisons are settled by the truth table and the
FIN residue is an ordinary integer problem.  The ``smt`` backend hands the
whole thing to z3 with S encoded as Boolean selectors; the ``bnb`` backend
enumerates S explicitly and runs its own branch and bound.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .arith import INF
from .system import Assignment, System, check_assignment

OVER_N = "overN"
OVER_NSTAR = "overNstar"
_MODE_ALIASES = {"N": OVER_N, "n": OVER_N, "finite": OVER_N, "overN": OVER_N,
                 "N*": OVER_NSTAR, "nstar": OVER_NSTAR, "general": OVER_NSTAR,
                 "overNstar": OVER_NSTAR}


class ResourceLimitExceeded(RuntimeError):
    """A search budget ran out before a verdict was reached."""


class SolverError(RuntimeError):
    """A backend produced an assignment that fails verification."""


@dataclass
class SolveStats:
    backend: str = ""
    mode: str = ""
    seconds: float = 0.0
    checks: int = 0
    nodes: int = 0
    variables: int = 0
    clauses: int = 0
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "extra"}
        d.update(self.extra)
        return d


def normalize_mode(mode: str) -> str:
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}") from None


def default_backend() -> str:
    return os.environ.get("FLPC_BACKEND", "smt")


def solve(
    system: System,
    mode: str = OVER_NSTAR,
    *,
    backend: Optional[str] = None,
    time_limit: Optional[float] = None,
    max_nodes: Optional[int] = None,
    prefer_finite: bool = False,
    minimize: Optional[Sequence[str]] = None,
    stats: Optional[SolveStats] = None,
) -> Optional[Assignment]:
    """Return a verified assignment, or ``None`` when the system is UNSAT.

    ``prefer_finite`` tries the all-finite case first under ``overNstar``;
    ``minimize`` asks for a small value of the sum of the given (finite)
    variables.  Neither changes the verdict.  Raises ResourceLimitExceeded
    when a budget runs out.
    """
    mode = normalize_mode(mode)
    backend = backend or default_backend()
    stats = stats if stats is not None else SolveStats()
    stats.backend, stats.mode = backend, mode
    stats.variables, stats.clauses = len(system.variables), len(system.clauses)
    start = time.perf_counter()
    try:
        if backend in ("smt", "z3"):
            from .smt import solve_smt
            result = solve_smt(system, mode, time_limit=time_limit, prefer_finite=prefer_finite,
                               minimize=minimize, stats=stats)
        elif backend == "bnb":
            from .bnb import solve_bnb
            result = solve_bnb(system, mode, time_limit=time_limit, max_nodes=max_nodes, stats=stats)
        else:
            raise ValueError(f"unknown backend {backend!r}")
    finally:
        stats.seconds = time.perf_counter() - start
    if result is None:
        return None
    if mode == OVER_N and any(v is INF for v in result.values()):
        raise SolverError("infinite value returned in overN mode")
    if not check_assignment(system, result):
        raise SolverError(f"{backend} returned an assignment that does not satisfy the system")
    return result
