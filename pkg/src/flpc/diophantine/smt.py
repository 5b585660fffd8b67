"""z3 backend.  Each variable v gets an integer part f_v >= 0 and, when it may
be infinite, a selector inf_v (with inf_v -> f_v = 0)."""
from __future__ import annotations

from typing import Optional, Sequence

import z3

from .arith import INF
from .solver import OVER_NSTAR, ResourceLimitExceeded
from .system import Comparison, LinExpr, System


class _Encoder:
    def __init__(self, system: System, mode: str):
        self.fin = {v: z3.Int(f"f!{k}") for k, v in enumerate(system.variables)}
        self.inf = {}
        if mode == OVER_NSTAR:
            self.inf = {v: z3.Bool(f"inf!{k}") for k, v in enumerate(system.variables)
                        if v not in system.finite_only}

    def base(self):
        out = [f >= 0 for f in self.fin.values()]
        out += [z3.Implies(b, self.fin[v] == 0) for v, b in self.inf.items()]
        return out

    def side(self, e: LinExpr):
        """(is_inf, finite value) of one side; is_inf is None when surely finite."""
        if e.const is INF:
            return z3.BoolVal(True), z3.IntVal(0)
        infs, terms = [], []
        for v, c in e.coeffs:
            if c is INF:
                cond = self.fin[v] > 0
                infs.append(z3.Or(cond, self.inf[v]) if v in self.inf else cond)
            else:
                terms.append(c * self.fin[v] if c != 1 else self.fin[v])
                if v in self.inf:
                    infs.append(self.inf[v])
        value = z3.Sum(terms) + e.const if terms else z3.IntVal(e.const)
        if not infs:
            return None, value
        return (infs[0] if len(infs) == 1 else z3.Or(infs)), value

    def comparison(self, c: Comparison):
        li, lv = self.side(c.lhs)
        ri, rv = self.side(c.rhs)
        op = c.op
        if op in (">=", ">"):
            li, lv, ri, rv = ri, rv, li, lv
            op = "<=" if op == ">=" else "<"
        if li is None and ri is None:
            return {"=": lv == rv, "!=": lv != rv, "<=": lv <= rv, "<": lv < rv}[op]
        L = li if li is not None else z3.BoolVal(False)
        R = ri if ri is not None else z3.BoolVal(False)
        if op in ("=", "!="):
            eq = z3.Or(z3.And(L, R), z3.And(z3.Not(L), z3.Not(R), lv == rv))
            return eq if op == "=" else z3.Not(eq)
        if op == "<=":
            return z3.Or(R, z3.And(z3.Not(L), lv <= rv))
        return z3.And(z3.Not(L), z3.Or(R, lv < rv))


def solve_smt(system: System, mode: str, *, time_limit: Optional[float] = None,
              prefer_finite: bool = False, minimize: Optional[Sequence[str]] = None,
              stats=None):
    enc = _Encoder(system, mode)
    solver = z3.SolverFor("QF_LIA") if not enc.inf else z3.Solver()
    if time_limit is not None:
        solver.set("timeout", max(1, int(time_limit * 1000)))
    solver.add(*enc.base())
    for cl in system.clauses:
        parts = [enc.comparison(c) for c in cl.comparisons]
        solver.add(parts[0] if len(parts) == 1 else z3.Or(parts))

    def check():
        if stats is not None:
            stats.checks += 1
        return solver.check()

    result = None
    if prefer_finite and enc.inf:
        solver.push()
        solver.add(*[z3.Not(b) for b in enc.inf.values()])
        r = check()
        if r == z3.sat:
            result = solver.model()
        else:
            solver.pop()
    if result is None:
        r = check()
        if r == z3.unsat:
            return None
        if r != z3.sat:
            raise ResourceLimitExceeded(f"z3: {solver.reason_unknown()}")
        result = solver.model()

    if minimize:
        result = _shrink(solver, enc, result, minimize, check)

    out = {}
    for v in system.variables:
        if v in enc.inf and z3.is_true(result.eval(enc.inf[v], model_completion=True)):
            out[v] = INF
        else:
            out[v] = result.eval(enc.fin[v], model_completion=True).as_long()
    return out


def _shrink(solver, enc, model, names, check, rounds: int = 12):
    """Binary search on the sum of ``names`` for a smaller witness."""
    names = [n for n in names if n in enc.fin]
    if not names:
        return model
    total = z3.Sum([enc.fin[n] for n in names])
    if enc.inf:
        fixed = [z3.Not(enc.inf[n]) if n in enc.inf and not z3.is_true(model.eval(enc.inf[n], model_completion=True))
                 else enc.inf[n] for n in names if n in enc.inf]
    else:
        fixed = []
    hi = model.eval(total, model_completion=True).as_long()
    lo = 0
    best = model
    for _ in range(rounds):
        if lo >= hi:
            break
        mid = (lo + hi) // 2
        solver.push()
        solver.add(*fixed)
        solver.add(total <= mid)
        r = check()
        if r == z3.sat:
            best = solver.model()
            hi = best.eval(total, model_completion=True).as_long()
        elif r == z3.unsat:
            lo = mid + 1
        else:
            solver.pop()
            break
        solver.pop()
    return best
