"""Model checking of formulas (with counting quantifiers) on finite structures.

Formulas are compiled once into closures over a slot array, so repeated
evaluation on many structures and tuples is cheap.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Mapping, Optional

from ..diophantine.arith import linear_set_member
from ..syntax import (And, Atom, Bottom, Equality, Exists, Forall, Formula, Iff, Implies, Not, Or,
                      Top, free_variables)
from .structure import Structure

# compiled: (relations, domain, slots) -> bool
Compiled = Callable[[Mapping, int, list], bool]


def _compile(f: Formula, slots: dict) -> Compiled:
    if isinstance(f, Top):
        return lambda R, n, env: True
    if isinstance(f, Bottom):
        return lambda R, n, env: False
    if isinstance(f, Atom):
        pred = f.pred
        idx = tuple(slots[a] for a in f.args)
        if not idx:
            return lambda R, n, env: () in R[pred]
        if len(idx) == 1:
            i, = idx
            return lambda R, n, env: (env[i],) in R[pred]
        if len(idx) == 2:
            i, j = idx
            return lambda R, n, env: (env[i], env[j]) in R[pred]
        return lambda R, n, env: tuple(env[i] for i in idx) in R[pred]
    if isinstance(f, Equality):
        i, j = slots[f.left], slots[f.right]
        return lambda R, n, env: env[i] == env[j]
    if isinstance(f, Not):
        g = _compile(f.arg, slots)
        return lambda R, n, env: not g(R, n, env)
    if isinstance(f, And):
        parts = [_compile(a, slots) for a in f.args]
        return lambda R, n, env: all(p(R, n, env) for p in parts)
    if isinstance(f, Or):
        parts = [_compile(a, slots) for a in f.args]
        return lambda R, n, env: any(p(R, n, env) for p in parts)
    if isinstance(f, Implies):
        a, b = _compile(f.left, slots), _compile(f.right, slots)
        return lambda R, n, env: (not a(R, n, env)) or b(R, n, env)
    if isinstance(f, Iff):
        a, b = _compile(f.left, slots), _compile(f.right, slots)
        return lambda R, n, env: a(R, n, env) == b(R, n, env)
    if isinstance(f, (Exists, Forall)):
        inner = dict(slots)
        k = len(slots)
        inner[f.var] = k
        body = _compile(f.body, inner)

        def bind(env, c):
            if len(env) <= k:
                env.extend([None] * (k + 1 - len(env)))
            env[k] = c

        if isinstance(f, Forall):
            def forall(R, n, env):
                for c in range(n):
                    bind(env, c)
                    if not body(R, n, env):
                        return False
                return True
            return forall
        cn, cp = f.count.n, f.count.p

        def count(R, n, env):
            k_ = 0
            for c in range(n):
                bind(env, c)
                if body(R, n, env):
                    k_ += 1
                    if cp == 0 and k_ > cn:
                        return False
            return linear_set_member(k_, cn, cp)
        return count
    raise TypeError(f"cannot evaluate {f!r}")


@lru_cache(maxsize=4096)
def compile_formula(f: Formula, free: tuple = ()) -> Compiled:
    """Compile ``f`` with its free variables bound to slots 0..len(free)-1."""
    return _compile(f, {v: i for i, v in enumerate(free)})


def evaluate(structure: Structure, f: Formula, env: Optional[Mapping[str, int]] = None) -> bool:
    """Truth of ``f`` in ``structure`` under ``env`` (a map from free variables to elements)."""
    env = dict(env or {})
    missing = free_variables(f) - set(env)
    if missing:
        raise ValueError(f"unbound free variables {sorted(missing)}")
    free = tuple(sorted(env))
    for v in free:
        e = env[v]
        if not (0 <= e < structure.domain):
            raise ValueError(f"element {e} outside the domain")
    fn = compile_formula(f, free)
    rels = {n: r.tuples for n, r in structure.relations.items()}
    return fn(_Relations(rels), structure.domain, [env[v] for v in free])


class _Relations(dict):
    def __missing__(self, key):
        raise KeyError(f"predicate {key} is not interpreted in the structure")


def evaluate_tuple(structure: Structure, f: Formula, names: tuple, values: tuple) -> bool:
    return evaluate(structure, f, dict(zip(names, values)))
