"""Explicit search backend: enumerate S by ascending size, settle
INF-involving comparisons by the truth table, then branch over disjunct
choices and solve each conjunctive residue with LP-based branch and bound.

Values are not bounded a priori (the classical small-solution bounds are far
beyond anything an LP can work with), so the node budget is what guarantees
termination; running out raises ResourceLimitExceeded, never a false UNSAT.
"""
from __future__ import annotations

import math
import time
from fractions import Fraction
from functools import reduce
from itertools import combinations, product
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .arith import INF
from .solver import OVER_NSTAR, ResourceLimitExceeded
from .system import LinExpr, System, compare_values

# A residue atom: (coeffs: dict var -> int, op, const) meaning sum(coeffs*v) op const,
# with op in {"<=", "="}.  Strict and reversed comparisons are rewritten.
DEFAULT_MAX_NODES = 200_000


class _Budget:
    def __init__(self, max_nodes, time_limit, stats):
        self.max_nodes = max_nodes or DEFAULT_MAX_NODES
        self.deadline = time.perf_counter() + time_limit if time_limit else None
        self.stats = stats
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.stats is not None:
            self.stats.nodes = self.nodes
        if self.nodes > self.max_nodes:
            raise ResourceLimitExceeded(f"bnb node budget ({self.max_nodes}) exhausted")
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise ResourceLimitExceeded("bnb time budget exhausted")


def solve_bnb(system: System, mode: str, *, time_limit=None, max_nodes=None, stats=None):
    budget = _Budget(max_nodes, time_limit, stats)
    candidates = [v for v in system.variables
                  if mode == OVER_NSTAR and v not in system.finite_only]
    aleph_coeff = sorted({v for cl in system.clauses for c in cl.comparisons
                          for e in (c.lhs, c.rhs) for v, k in e.coeffs if k is INF})
    for size in range(len(candidates) + 1):
        for S in combinations(candidates, size):
            infinite = set(S)
            split = [v for v in aleph_coeff if v not in infinite]
            for zeros in product((True, False), repeat=len(split)):
                budget.tick()
                zero_set = {v for v, z in zip(split, zeros) if z}
                nonzero = {v for v, z in zip(split, zeros) if not z}
                residue = _residue(system, infinite, zero_set, nonzero)
                if residue is None:
                    continue
                fin_vars = [v for v in system.variables if v not in infinite]
                sol = _solve_disjunctive(residue, fin_vars, budget)
                if sol is not None:
                    out = {v: INF for v in infinite}
                    out.update(sol)
                    return out
    return None


def _side_is_inf(e: LinExpr, infinite, nonzero) -> bool:
    if e.const is INF:
        return True
    for v, c in e.coeffs:
        if v in infinite:
            return True
        if c is INF and v in nonzero:
            return True
    return False


def _linear(e: LinExpr, infinite, zero_set):
    coeffs = {}
    for v, c in e.coeffs:
        if v in infinite:
            raise AssertionError("finite side mentions an infinite variable")
        if c is INF:
            if v not in zero_set:
                raise AssertionError("unsplit aleph coefficient")
            continue
        coeffs[v] = coeffs.get(v, 0) + c
    return coeffs, e.const


def _atoms(lc, lk, op, rc, rk):
    """Rewrite lhs op rhs into alternatives of conjunctions of (coeffs, op, const)."""
    diff = dict(lc)
    for v, c in rc.items():
        diff[v] = diff.get(v, 0) - c
    diff = {v: c for v, c in diff.items() if c != 0}
    k = rk - lk  # sum(diff * v) op k
    neg = {v: -c for v, c in diff.items()}
    if op == "=":
        return [[(diff, "=", k)]]
    if op == "<=":
        return [[(diff, "<=", k)]]
    if op == "<":
        return [[(diff, "<=", k - 1)]]
    if op == ">=":
        return [[(neg, "<=", -k)]]
    if op == ">":
        return [[(neg, "<=", -k - 1)]]
    if op == "!=":
        return [[(diff, "<=", k - 1)], [(neg, "<=", -k - 1)]]
    raise ValueError(op)


def _residue(system, infinite, zero_set, nonzero):
    """Clauses over finite variables as lists of alternatives, or None if some clause dies."""
    clauses = []
    for v in sorted(zero_set):
        clauses.append([[({v: 1}, "=", 0)]])
    for v in sorted(nonzero):
        clauses.append([[({v: -1}, "<=", -1)]])
    for cl in system.clauses:
        alts = []
        satisfied = False
        for c in cl.comparisons:
            li = _side_is_inf(c.lhs, infinite, nonzero)
            ri = _side_is_inf(c.rhs, infinite, nonzero)
            if li or ri:
                # truth table: INF behaves as a value above every finite one
                a = INF if li else 0
                b = INF if ri else 0
                if compare_values(a, c.op, b):
                    satisfied = True
                    break
                continue
            lc, lk = _linear(c.lhs, infinite, zero_set)
            rc, rk = _linear(c.rhs, infinite, zero_set)
            for alt in _atoms(lc, lk, c.op, rc, rk):
                if all(not coeffs for coeffs, _, _ in alt):
                    if all((0 == k) if op == "=" else (0 <= k) for _, op, k in alt):
                        satisfied = True
                        break
                    continue
                alts.append(alt)
            if satisfied:
                break
        if satisfied:
            continue
        if not alts:
            return None
        clauses.append(alts)
    return clauses


def _holds(atom, values) -> bool:
    coeffs, op, k = atom
    s = sum(c * values.get(v, 0) for v, c in coeffs.items())
    return s == k if op == "=" else s <= k


def _solve_disjunctive(clauses, variables, budget):
    order = sorted(range(len(clauses)), key=lambda i: len(clauses[i]))
    clauses = [clauses[i] for i in order]
    return _dfs([], clauses, variables, budget)


def _dfs(chosen, remaining, variables, budget):
    budget.tick()
    # unit propagation
    chosen = list(chosen)
    rest = []
    for alts in remaining:
        if len(alts) == 1:
            chosen.extend(alts[0])
        else:
            rest.append(alts)
    sol = _ilp(chosen, variables, budget)
    if sol is None:
        return None
    pending = [alts for alts in rest if not any(all(_holds(a, sol) for a in alt) for alt in alts)]
    if not pending:
        return sol
    # branch on the shortest violated clause; every other open clause stays
    # open, since moving the LP point may break one it happened to satisfy
    first = min(pending, key=len)
    others = [alts for alts in rest if alts is not first]
    for alt in first:
        found = _dfs(chosen + list(alt), others, variables, budget)
        if found is not None:
            return found
    return None


def _gcd_infeasible(atoms) -> bool:
    for coeffs, op, k in atoms:
        if op == "=" and coeffs:
            g = reduce(math.gcd, (abs(c) for c in coeffs.values()))
            if k % g:
                return True
    return False


def _ilp(atoms, variables, budget):
    """Nonnegative integer solution of a conjunction, or None."""
    if _gcd_infeasible(atoms):
        return None
    for coeffs, op, k in atoms:
        if not coeffs and not ((0 == k) if op == "=" else (0 <= k)):
            return None
    used = sorted({v for coeffs, _, _ in atoms for v in coeffs})
    base = {v: 0 for v in variables}
    if not used:
        return base
    index = {v: i for i, v in enumerate(used)}
    n = len(used)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for coeffs, op, k in atoms:
        if not coeffs:
            continue
        row = np.zeros(n)
        for v, c in coeffs.items():
            row[index[v]] = c
        (A_eq if op == "=" else A_ub).append(row)
        (b_eq if op == "=" else b_ub).append(k)
    stack = [[(0, None)] * n]
    while stack:
        budget.tick()
        bounds = stack.pop()
        res = linprog(np.ones(n), A_ub=np.array(A_ub) if A_ub else None, b_ub=b_ub or None,
                      A_eq=np.array(A_eq) if A_eq else None, b_eq=b_eq or None,
                      bounds=bounds, method="highs")
        if res.status == 2:
            continue
        if res.status not in (0, 3):
            raise ResourceLimitExceeded(f"LP failure: {res.message}")
        if res.status == 3:
            # minimising a nonnegative sum cannot be unbounded; treat as numerical trouble
            raise ResourceLimitExceeded("LP reported unbounded")
        x = res.x
        rounded = [int(round(val)) for val in x]
        cand = dict(base)
        cand.update({v: max(0, rounded[i]) for i, v in enumerate(used)})
        if all(_holds(a, cand) for a in atoms):
            return cand
        # branch on the most fractional coordinate (or the first if all look integral)
        frac = [abs(val - round(val)) for val in x]
        i = int(np.argmax(frac))
        val = Fraction(x[i]).limit_denominator(10**6)
        lo, hi = bounds[i]
        fl = math.floor(val)
        if frac[i] < 1e-9:
            # integral but inexact: split around the rounded value
            fl = rounded[i]
            left = list(bounds)
            left[i] = (lo, fl - 1) if fl - 1 >= lo else None
            mid = list(bounds)
            mid[i] = (fl, fl)
            right = list(bounds)
            right[i] = (fl + 1, hi)
            for b in (right, left, mid):
                if b[i] is not None and (b[i][1] is None or b[i][0] <= b[i][1]):
                    stack.append(b)
            continue
        down = list(bounds)
        down[i] = (lo, fl)
        up = list(bounds)
        up[i] = (fl + 1, hi)
        if hi is None or fl + 1 <= hi:
            stack.append(up)
        if fl >= lo:
            stack.append(down)
    return None
