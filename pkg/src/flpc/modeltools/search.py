"""Model search.

``brute_force_search`` is the plain oracle: it walks all ground atoms in a
fixed order (false before true) and prunes with a three-valued evaluation of
the sentence on the partial structure.  ``search_normal_form`` exploits the
shape of normal-form sentences: once the lower-arity predicates are fixed,
each tuple's row of top-arity atoms can be chosen independently, and the
counting constraints along a row are checked by a small dynamic program.
"""
from __future__ import annotations

import itertools
import random
from functools import lru_cache
from typing import Iterator, Optional

from ..normalform import FlutedAtom, NormalFormSentence, branch_nullary, is_eq, qf_eval
from ..syntax import (And, Atom, Bottom, Equality, Exists, Forall, Formula, Iff, Implies, Not, Or,
                      Signature, Top, predicates_of)
from .evaluate import evaluate
from .structure import Relation, Structure


class SearchLimitExceeded(RuntimeError):
    """The search space exceeds the configured cap."""


# three-valued evaluation on partial structures

def _possible(lo: int, hi: int, n: int, p: int) -> tuple:
    """(some k in [lo, hi] lies in n^{+p}, every k in [lo, hi] does)."""
    if p == 0:
        some = lo <= n <= hi
        every = lo == hi == n
        return some, every
    start = max(lo, n)
    first = start + ((n - start) % p)
    some = first <= hi
    if lo == hi:
        return some, some
    every = p == 1 and lo >= n
    return some, every


def _compile3(f: Formula, slots: dict):
    if isinstance(f, Top):
        return lambda R, n, env: True
    if isinstance(f, Bottom):
        return lambda R, n, env: False
    if isinstance(f, Atom):
        pred = f.pred
        idx = tuple(slots[a] for a in f.args)
        return lambda R, n, env: R[pred].get(tuple(env[i] for i in idx))
    if isinstance(f, Equality):
        i, j = slots[f.left], slots[f.right]
        return lambda R, n, env: env[i] == env[j]
    if isinstance(f, Not):
        g = _compile3(f.arg, slots)

        def not_(R, n, env):
            v = g(R, n, env)
            return None if v is None else not v
        return not_
    if isinstance(f, (And, Or)):
        parts = [_compile3(a, slots) for a in f.args]
        stop = isinstance(f, Or)

        def junction(R, n, env):
            unknown = False
            for part in parts:
                v = part(R, n, env)
                if v is None:
                    unknown = True
                elif v is stop:
                    return stop
            return None if unknown else (not stop)
        return junction
    if isinstance(f, Implies):
        return _compile3(Or((Not(f.left), f.right)), slots)
    if isinstance(f, Iff):
        a, b = _compile3(f.left, slots), _compile3(f.right, slots)

        def iff(R, n, env):
            x, y = a(R, n, env), b(R, n, env)
            return None if x is None or y is None else x == y
        return iff
    if isinstance(f, (Exists, Forall)):
        k = len(slots)
        inner = dict(slots)
        inner[f.var] = k
        body = _compile3(f.body, inner)

        def scan(R, n, env):
            if len(env) <= k:
                env.extend([None] * (k + 1 - len(env)))
            true = unknown = 0
            for c in range(n):
                env[k] = c
                v = body(R, n, env)
                if v is None:
                    unknown += 1
                elif v:
                    true += 1
            return true, unknown

        if isinstance(f, Forall):
            def forall(R, n, env):
                if len(env) <= k:
                    env.extend([None] * (k + 1 - len(env)))
                unknown = False
                for c in range(n):
                    env[k] = c
                    v = body(R, n, env)
                    if v is False:
                        return False
                    unknown |= v is None
                return None if unknown else True
            return forall
        cn, cp = f.count.n, f.count.p

        def count(R, n, env):
            t, u = scan(R, n, env)
            some, every = _possible(t, t + u, cn, cp)
            if every:
                return True
            if not some:
                return False
            return None
        return count
    raise TypeError(f"cannot evaluate {f!r}")


@lru_cache(maxsize=1024)
def _compiled3(f: Formula):
    return _compile3(f, {})


def evaluate_partial(partial: dict, domain: int, f: Formula) -> Optional[bool]:
    """Kleene truth value of sentence ``f``; ``partial`` maps predicate -> {tuple: bool}."""
    return _compiled3(f)(partial, domain, [])


def ground_atoms(sig: Signature, domain: int) -> list:
    """Canonical order: predicates by (arity, name), tuples lexicographically."""
    out = []
    for name, arity in sorted(sig.predicates, key=lambda p: (p[1], p[0])):
        for t in itertools.product(range(domain), repeat=arity):
            out.append((name, t))
    return out


def _to_structure(sig: Signature, domain: int, partial: dict) -> Structure:
    return Structure(domain, {name: Relation(arity, [t for t, v in partial[name].items() if v])
                              for name, arity in sig.predicates})


def brute_force_search(s: Formula, sig: Optional[Signature] = None, max_size: int = 4,
                       min_size: int = 1, max_atoms: int = 64) -> Optional[Structure]:
    """First model of ``s`` (domain sizes min_size..max_size) in canonical order, or None."""
    sig = sig if sig is not None else predicates_of(s)
    for size in range(min_size, max_size + 1):
        atoms = ground_atoms(sig, size)
        if len(atoms) > max_atoms:
            raise SearchLimitExceeded(f"{len(atoms)} ground atoms at size {size} exceed {max_atoms}")
        found = _dfs(s, sig, size, atoms)
        if found is not None:
            return found
    return None


def _dfs(s: Formula, sig: Signature, size: int, atoms: list) -> Optional[Structure]:
    partial = {name: {} for name in sig.names}
    fn = _compiled3(s)

    def rec(i: int) -> bool:
        v = fn(partial, size, [])
        if v is False:
            return False
        if v is True:
            for name, t in atoms[i:]:
                partial[name][t] = False
            return True
        if i == len(atoms):
            return False
        name, t = atoms[i]
        for value in (False, True):
            partial[name][t] = value
            if rec(i + 1):
                return True
        del partial[name][t]
        return False

    if rec(0):
        return _to_structure(sig, size, partial)
    return None


def iterate_models(s: Formula, sig: Optional[Signature], size: int) -> Iterator[Structure]:
    """Every model of ``s`` with the given domain size (no pruning beyond 3-valued checks)."""
    sig = sig if sig is not None else predicates_of(s)
    atoms = ground_atoms(sig, size)
    partial = {name: {} for name in sig.names}
    fn = _compiled3(s)

    def rec(i: int):
        if fn(partial, size, []) is False:
            return
        if i == len(atoms):
            yield _to_structure(sig, size, partial)
            return
        name, t = atoms[i]
        for value in (False, True):
            partial[name][t] = value
            yield from rec(i + 1)
        del partial[name][t]

    yield from rec(0)


# normal-form search

def _abstract(k: int, n: int, p: int) -> int:
    if k < n:
        return k
    if p > 0:
        return n + (k - n) % p
    return min(k, n + 1)


def _step(k: int, n: int, p: int) -> int:
    return _abstract(k + 1, n, p) if k >= n else k + 1


def _solve_row(specs: tuple, options: list, rng: Optional[random.Random]) -> Optional[list]:
    """Pick one valuation per element so that every counting spec is met."""
    start = tuple(0 for _ in specs)
    layers = [{start: None}]
    for opts in options:
        nxt: dict = {}
        order = list(opts)
        if rng is not None:
            rng.shuffle(order)
        for state in layers[-1]:
            for bits, val in order:
                new = tuple(_step(k, n, p) if b else k for k, b, (n, p, _) in zip(state, bits, specs))
                if new not in nxt:
                    nxt[new] = (state, val)
        if not nxt:
            return None
        layers.append(nxt)
    final = [st for st in layers[-1]
             if all((k == n) == pos for k, (n, p, pos) in zip(st, specs))]
    if not final:
        return None
    state = rng.choice(final) if rng is not None else min(final)
    picks = []
    for layer in reversed(layers[1:]):
        prev, val = layer[state]
        picks.append(val)
        state = prev
    return picks[::-1]


def search_normal_form(nf: NormalFormSentence, max_size: int = 4, min_size: int = 1,
                       rng: Optional[random.Random] = None,
                       max_lower: int = 1 << 20) -> Optional[Structure]:
    """A finite model of ``nf`` with min_size..max_size elements, or None.

    Exhaustive over the lower-arity predicates; exact per row.  With ``rng``
    the enumeration order and row choices are randomised (still complete).
    """
    if nf.nullary_predicates or not _trivial(nf.residue):
        for branch in branch_nullary(nf):
            found = search_normal_form(branch, max_size, min_size, rng, max_lower)
            if found is not None:
                values = branch.nullary_values
                return found.with_relations({q: Relation(0, [()] if v else []) for q, v in values.items()})
        return None
    for size in range(min_size, max_size + 1):
        found = _search_size(nf, size, rng, max_lower)
        if found is not None:
            return found
    return None


def _trivial(f: Formula) -> bool:
    return isinstance(f, Top)


def _search_size(nf: NormalFormSentence, size: int, rng, max_lower: int) -> Optional[Structure]:
    l = nf.guard_depth
    top_preds = [name for name, a in nf.signature.predicates if a == l + 1]
    lower_preds = [(name, a) for name, a in nf.signature.predicates if 1 <= a <= l]
    if any(a > l + 1 for _, a in nf.signature.predicates):
        raise ValueError("signature has predicates wider than the normal form")
    lower_atoms = [(name, t) for name, a in lower_preds for t in itertools.product(range(size), repeat=a)]
    total = 1 << len(lower_atoms)
    if total > max_lower:
        raise SearchLimitExceeded(f"2^{len(lower_atoms)} lower-arity interpretations at size {size}")
    valuations = list(itertools.product((False, True), repeat=len(top_preds)))
    conjuncts = [(pos, c) for pos, c in nf.conjuncts]
    codes = range(total)
    if rng is not None:
        codes = list(codes)
        rng.shuffle(codes)
    tuples_l = list(itertools.product(range(size), repeat=l))
    for code in codes:
        true_lower = {(name, t) for i, (name, t) in enumerate(lower_atoms) if code >> i & 1}
        rows = {}
        ok = True
        cache: dict = {}
        for abar in tuples_l:
            picks = _row(nf, l, abar, size, true_lower, top_preds, valuations, conjuncts, cache, rng)
            if picks is None:
                ok = False
                break
            rows[abar] = picks
        if not ok:
            continue
        rels = {name: set() for name, _ in nf.signature.predicates}
        for name, t in true_lower:
            rels[name].add(t)
        for abar, picks in rows.items():
            for c, val in enumerate(picks):
                for name, v in zip(top_preds, val):
                    if v:
                        rels[name].add(abar + (c,))
        return Structure(size, {name: Relation(a, rels[name]) for name, a in nf.signature.predicates})
    return None


def _atom_value(atom: FlutedAtom, tup: tuple, true_lower: set, top: Optional[dict] = None) -> bool:
    if is_eq(atom):
        return tup[-2] == tup[-1]
    args = tup[len(tup) - atom.arity:]
    if top is not None and atom.pred in top:
        return top[atom.pred]
    return (atom.pred, args) in true_lower


def _row(nf, l, abar, size, true_lower, top_preds, valuations, conjuncts, cache, rng):
    active = []
    for pos, c in conjuncts:
        if qf_eval(c.guard, lambda a: _atom_value(a, abar, true_lower)):
            active.append((pos, c))
    top_set = set(top_preds)
    options = []
    for c in range(size):
        tup = abar + (c,)
        opts = {}
        for val in valuations:
            top = dict(zip(top_preds, val))
            bits = []
            allowed = True
            for pos, cj in active:
                b = qf_eval(cj.body, lambda a: _atom_value(a, tup, true_lower, top if a.pred in top_set else None))
                if b and pos and cj.is_hard:
                    allowed = False
                    break
                bits.append(b)
            if allowed:
                opts.setdefault(tuple(bits), val)
        options.append(tuple(sorted(opts.items())))
    specs = tuple((c.count.n, c.count.p, pos) for pos, c in active)
    # hard conjuncts are already enforced by the filter
    keep = [i for i, (pos, c) in enumerate(active) if not (pos and c.is_hard)]
    specs = tuple(specs[i] for i in keep)
    options = [tuple({tuple(bits[i] for i in keep): val for bits, val in opts}.items()) for opts in options]
    key = (specs, tuple(options))
    if rng is None and key in cache:
        return cache[key]
    picks = _solve_row(specs, options, rng)
    cache[key] = picks
    return picks


def verify_normal_form_model(structure: Structure, nf: NormalFormSentence) -> bool:
    return evaluate(structure, nf.to_formula())
