"""Brute-force oracles and shared sentences for the test suite."""
from __future__ import annotations

import itertools
import random

import numpy as np

from flpc.diophantine import INF, OVER_N, LinExpr, System, clause, Comparison, OPS

# INF is the maximum and equal only to itself, so a large sentinel is exact
# as long as every finite side stays below it.
_SENTINEL = 10 ** 9

EQ1 = ("forall x1 (cond(x1) -> exists x2 (solo(x2) & fav(x1,x2) & "
       "forall x3 (conc(x3) -> nom(x1,x2,x3))))")
EQ2 = ("forall x1 (orch(x1) -> exists[0+2] x2 (pers(x2) & "
       "exists x3 (first_viol(x3) & hires_to_play(x1,x2,x3))))")
AXIOM_OF_INFINITY = "!exists[0+1] x (true)"

# filled by the acceptance suite, printed in the terminal summary
ACCEPTANCE_LINES: list = []


def _side(expr: LinExpr, grid: dict, inf_vars: set, shape) -> np.ndarray:
    if expr.const is INF or any(name in inf_vars for name, _ in expr.coeffs):
        return np.full(shape, _SENTINEL, dtype=np.int64)
    out = np.full(shape, expr.const, dtype=np.int64)
    for name, c in expr.coeffs:
        out = out + c * grid[name]
    return out


def _holds(c: Comparison, grid, inf_vars, shape) -> np.ndarray:
    a = _side(c.lhs, grid, inf_vars, shape)
    b = _side(c.rhs, grid, inf_vars, shape)
    return {"=": a == b, "!=": a != b, "<=": a <= b, "<": a < b, ">=": a >= b, ">": a > b}[c.op]


def dioph_exhaustive(system: System, mode: str, bound: int = 12):
    """First assignment over [0, bound]^n (plus INF in overNstar) that satisfies ``system``."""
    names = list(system.variables)
    infinite_ok = [v for v in names if v not in system.finite_only] if mode != OVER_N else []
    for k in range(len(infinite_ok) + 1):
        for inf_vars in itertools.combinations(infinite_ok, k):
            inf_set = set(inf_vars)
            finite = [v for v in names if v not in inf_set]
            shape = (bound + 1,) * len(finite)
            axes = np.indices(shape, dtype=np.int64) if finite else np.zeros((0,), dtype=np.int64)
            grid = {v: axes[i] for i, v in enumerate(finite)}
            ok = np.ones(shape, dtype=bool)
            for cl in system.clauses:
                any_ = np.zeros(shape, dtype=bool)
                for comp in cl.comparisons:
                    any_ |= _holds(comp, grid, inf_set, shape)
                ok &= any_
                if not ok.any():
                    break
            if ok.any():
                idx = tuple(int(i) for i in np.argwhere(ok)[0]) if finite else ()
                sol = {v: idx[i] for i, v in enumerate(finite)}
                sol.update({v: INF for v in inf_set})
                return sol
    return None


def random_system(rng: random.Random, n_vars: int, n_clauses: int, *, inf_consts: bool = False) -> System:
    names = [f"v{i}" for i in range(n_vars)]

    def expr():
        k = rng.randint(0, 2)
        coeffs = {rng.choice(names): rng.randint(1, 3) for _ in range(k)}
        const = rng.randint(0, 6)
        if inf_consts and rng.random() < 0.05:
            const = INF
        return LinExpr.of(coeffs, const)

    clauses = []
    for _ in range(n_clauses):
        comps = [Comparison(expr(), rng.choice(OPS), expr()) for _ in range(rng.randint(1, 2))]
        clauses.append(clause(*comps))
    finite_only = frozenset(v for v in names if rng.random() < 0.2)
    return System(tuple(names), tuple(clauses), finite_only)
