"""Normal form: guarded counting conjuncts at uniform depth.

Quantifier-free parts are stored in suffix form: an atom is just a predicate
(with its arity) and denotes r(x_{d-a+1}, ..., x_d) at whatever depth d it is
read.  Padding a conjunct to a larger depth is therefore the identity.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional

from .syntax import (FALSE, NONE, TRUE, And, Atom, Bottom, CountSpec, Equality, Exists, Forall,
                     Formula, FormulaSyntaxError, Iff, Implies, Not, Or, Signature, Top,
                     atom_positions, children, classify_fragment, conj, formula_size,
                     predicates_of, subformulas, suffix_kind)


class NotFlutedError(ValueError):
    """The input is outside the fluted fragment."""


@dataclass(frozen=True, order=True)
class FlutedAtom(Formula):
    """r(x_{d-a+1}, ..., x_d) at the depth d where it is read; '=' is x_{d-1} = x_d."""

    pred: str
    arity: int
    reversed: bool = False

    def __str__(self) -> str:
        if is_eq(self):
            return "="
        return f"{self.pred}/{self.arity}" + ("~" if self.reversed else "")


EQ = FlutedAtom("=", 2)


def is_eq(a: FlutedAtom) -> bool:
    return a.pred == "="


# quantifier-free helpers

def qf_atoms(f: Formula) -> set:
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, FlutedAtom):
            out.add(g)
        else:
            stack.extend(children(g))
    return out


def qf_max_arity(f: Formula) -> int:
    return max((a.arity for a in qf_atoms(f)), default=0)


def qf_eval(f: Formula, value: Callable[[FlutedAtom], bool]) -> bool:
    if isinstance(f, FlutedAtom):
        return bool(value(f))
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Not):
        return not qf_eval(f.arg, value)
    if isinstance(f, And):
        return all(qf_eval(a, value) for a in f.args)
    if isinstance(f, Or):
        return any(qf_eval(a, value) for a in f.args)
    if isinstance(f, Implies):
        return (not qf_eval(f.left, value)) or qf_eval(f.right, value)
    if isinstance(f, Iff):
        return qf_eval(f.left, value) == qf_eval(f.right, value)
    raise TypeError(f"not quantifier-free: {f!r}")


def qf_eval3(f: Formula, value: Callable[[FlutedAtom], Optional[bool]]) -> Optional[bool]:
    """Kleene evaluation; ``value`` may return None for unknown atoms."""
    if isinstance(f, FlutedAtom):
        return value(f)
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Not):
        v = qf_eval3(f.arg, value)
        return None if v is None else not v
    if isinstance(f, And):
        unknown = False
        for a in f.args:
            v = qf_eval3(a, value)
            if v is False:
                return False
            unknown |= v is None
        return None if unknown else True
    if isinstance(f, Or):
        unknown = False
        for a in f.args:
            v = qf_eval3(a, value)
            if v is True:
                return True
            unknown |= v is None
        return None if unknown else False
    if isinstance(f, Implies):
        return qf_eval3(Or((Not(f.left), f.right)), value)
    if isinstance(f, Iff):
        a, b = qf_eval3(f.left, value), qf_eval3(f.right, value)
        return None if a is None or b is None else a == b
    raise TypeError(f"not quantifier-free: {f!r}")


def qf_substitute(f: Formula, values: Mapping) -> Formula:
    """Replace atoms (keyed by predicate name or by FlutedAtom) by constants and fold."""
    if isinstance(f, FlutedAtom):
        v = values.get(f, values.get(f.pred)) if values else None
        if v is None:
            return f
        if isinstance(v, Formula):
            return v
        return TRUE if v else FALSE
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Not):
        a = qf_substitute(f.arg, values)
        if isinstance(a, Top):
            return FALSE
        if isinstance(a, Bottom):
            return TRUE
        if isinstance(a, Not):
            return a.arg
        return Not(a)
    if isinstance(f, And):
        args = []
        for a in f.args:
            s = qf_substitute(a, values)
            if isinstance(s, Bottom):
                return FALSE
            if not isinstance(s, Top):
                args.append(s)
        return conj(*args)
    if isinstance(f, Or):
        args = []
        for a in f.args:
            s = qf_substitute(a, values)
            if isinstance(s, Top):
                return TRUE
            if not isinstance(s, Bottom):
                args.append(s)
        return FALSE if not args else (args[0] if len(args) == 1 else Or(tuple(args)))
    if isinstance(f, Implies):
        l, r = qf_substitute(f.left, values), qf_substitute(f.right, values)
        if isinstance(l, Bottom) or isinstance(r, Top):
            return TRUE
        if isinstance(l, Top):
            return r
        if isinstance(r, Bottom):
            return qf_substitute(Not(l), {})
        return Implies(l, r)
    if isinstance(f, Iff):
        l, r = qf_substitute(f.left, values), qf_substitute(f.right, values)
        for x, y in ((l, r), (r, l)):
            if isinstance(x, Top):
                return y
            if isinstance(x, Bottom):
                return qf_substitute(Not(y), {})
        return Iff(l, r)
    raise TypeError(f"not quantifier-free: {f!r}")


def simplify(f: Formula) -> Formula:
    return qf_substitute(f, {})


def polarities(f: Formula) -> dict:
    """Atom -> set of polarities (+1 / -1) with which it occurs."""
    out: dict = {}

    def walk(g, sign):
        if isinstance(g, FlutedAtom):
            out.setdefault(g, set()).add(sign)
        elif isinstance(g, Not):
            walk(g.arg, -sign)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a, sign)
        elif isinstance(g, Implies):
            walk(g.left, -sign)
            walk(g.right, sign)
        elif isinstance(g, Iff):
            for a in (g.left, g.right):
                walk(a, sign)
                walk(a, -sign)

    walk(f, 1)
    return out


def variables_at(depth: int) -> tuple:
    return tuple(f"x{i}" for i in range(1, depth + 1))


def qf_to_formula(f: Formula, depth: int, names: Optional[tuple] = None) -> Formula:
    """Spell out suffix atoms over explicit variables x1..x_depth."""
    names = names or variables_at(depth)
    if isinstance(f, FlutedAtom):
        if f.arity > depth:
            raise ValueError(f"atom {f.pred}/{f.arity} does not fit depth {depth}")
        args = names[depth - f.arity:depth]
        if f.reversed:
            args = tuple(reversed(args))
        if is_eq(f):
            return Equality(args[0], args[1])
        return Atom(f.pred, tuple(args))
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Not):
        return Not(qf_to_formula(f.arg, depth, names))
    if isinstance(f, And):
        return And(tuple(qf_to_formula(a, depth, names) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(qf_to_formula(a, depth, names) for a in f.args))
    if isinstance(f, Implies):
        return Implies(qf_to_formula(f.left, depth, names), qf_to_formula(f.right, depth, names))
    if isinstance(f, Iff):
        return Iff(qf_to_formula(f.left, depth, names), qf_to_formula(f.right, depth, names))
    raise TypeError(f"not quantifier-free: {f!r}")


def exactly_one(atoms: list) -> Formula:
    if not atoms:
        return FALSE
    at_most = [Or((Not(a), Not(b))) for a, b in itertools.combinations(atoms, 2)]
    some = atoms[0] if len(atoms) == 1 else Or(tuple(atoms))
    return conj(some, *at_most)


# normal form sentences

@dataclass(frozen=True)
class Conjunct:
    """guard -> [not] exists[count] x_{l+1} body, universally closed."""

    guard: Formula
    count: CountSpec
    body: Formula

    @property
    def is_hard(self) -> bool:
        return (self.count.n, self.count.p) == (0, 0)


@dataclass(frozen=True)
class FreshDefinition:
    """A fresh predicate stands for ``formula`` with free ``variables`` (in order)."""

    formula: Formula
    variables: tuple


@dataclass(frozen=True)
class NormalFormSentence:
    width: int
    positives: tuple
    negatives: tuple
    signature: Signature
    fresh_map: Mapping = field(default_factory=dict, compare=False, hash=False)
    residue: Formula = TRUE
    nullary_values: Mapping = field(default_factory=dict, compare=False, hash=False)

    @property
    def guard_depth(self) -> int:
        return self.width - 1

    @property
    def conjuncts(self) -> list:
        return [(True, c) for c in self.positives] + [(False, c) for c in self.negatives]

    @property
    def nullary_predicates(self) -> tuple:
        return self.signature.with_arity(0)

    def size(self) -> int:
        total = formula_size(self.residue)
        for _, c in self.conjuncts:
            total += formula_size(c.guard) + formula_size(c.body) + 2
        return total

    def to_formula(self) -> Formula:
        l = self.guard_depth
        parts = [] if isinstance(self.residue, Top) else [qf_to_formula(self.residue, 0)]
        parts += [conjunct_formula(c, l, pos) for pos, c in self.conjuncts]
        return conj(*parts)

    def describe(self) -> dict:
        from .syntax import print_formula
        l = self.guard_depth

        def item(c):
            return {"guard": print_formula(qf_to_formula(c.guard, l)),
                    "count": [c.count.n, c.count.p],
                    "body": print_formula(qf_to_formula(c.body, l + 1))}
        return {
            "width": self.width,
            "positive": [item(c) for c in self.positives],
            "negative": [item(c) for c in self.negatives],
            "signature": [list(p) for p in self.signature.predicates],
            "fresh": sorted(self.fresh_map),
        }


def conjunct_formula(c: Conjunct, guard_depth: int, positive: bool) -> Formula:
    names = variables_at(guard_depth + 1)
    q = Exists(c.count, names[-1], qf_to_formula(c.body, guard_depth + 1, names))
    body = q if positive else Not(q)
    inner = body if isinstance(c.guard, Top) else Implies(qf_to_formula(c.guard, guard_depth, names), body)
    for v in reversed(names[:-1]):
        inner = Forall(v, inner)
    return inner


def check_uniform(nf: NormalFormSentence) -> None:
    """Raise unless every guard fits depth l and every body depth l+1."""
    l = nf.guard_depth
    for _, c in nf.conjuncts:
        for f, d in ((c.guard, l), (c.body, l + 1)):
            for a in qf_atoms(f):
                if a.arity > d or (is_eq(a) and d < 2):
                    raise ValueError(f"atom {a.pred}/{a.arity} does not fit depth {d}")


def _fresh_names(taken: set, prefix: str = "q"):
    while any(n.startswith(prefix) and n[len(prefix):].isdigit() for n in taken):
        prefix = "_" + prefix
    i = 0
    while True:
        name = f"{prefix}{i}"
        i += 1
        if name not in taken:
            yield name


def to_normal_form(s: Formula, sig: Optional[Signature] = None) -> NormalFormSentence:
    """Replace quantified subformulas innermost-out by fresh predicates."""
    report = classify_fragment(s)
    if not report.is_fluted:
        raise _not_fluted(report)
    sig = sig if sig is not None else predicates_of(s)
    gen = _fresh_names(set(sig.names))
    quantifiers = sum(isinstance(g, (Exists, Forall)) for g in subformulas(s))
    names = [next(gen) for _ in range(quantifiers)]
    order = [0]
    positives, negatives = [], []
    fresh_sig = []
    fresh_map = {}
    max_depth = 0

    def lower(g: Formula, scope: list) -> Formula:
        nonlocal max_depth
        if isinstance(g, Atom):
            if not g.args:
                return FlutedAtom(g.pred, 0)
            return FlutedAtom(g.pred, len(g.args))
        if isinstance(g, Equality):
            return EQ
        if isinstance(g, (Top, Bottom)):
            return g
        if isinstance(g, Not):
            return Not(lower(g.arg, scope))
        if isinstance(g, And):
            return And(tuple(lower(a, scope) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(lower(a, scope) for a in g.args))
        if isinstance(g, Implies):
            return Implies(lower(g.left, scope), lower(g.right, scope))
        if isinstance(g, Iff):
            return Iff(lower(g.left, scope), lower(g.right, scope))
        if isinstance(g, Forall):
            count, body = NONE, Not(g.body)
        elif isinstance(g, Exists):
            count, body = g.count, g.body
        else:
            raise TypeError(f"unexpected node {g!r}")
        d = len(scope)
        slot = order[0]  # fresh predicates are numbered outermost first
        order[0] += 1
        chi = lower(body, scope + [g.var])
        k = max(0, qf_max_arity(chi) - 1)
        q = names[slot]
        atom = FlutedAtom(q, k)
        fresh_sig.append((q, k))
        fresh_map[q] = FreshDefinition(g, tuple(scope[d - k:]))
        positives.append(Conjunct(atom, count, chi))
        negatives.append(Conjunct(Not(atom), count, chi))
        max_depth = max(max_depth, d + 1)
        return atom

    residue = lower(s, [])
    width = max(2, max_depth)
    full_sig = sig.union(Signature(tuple(fresh_sig)))
    nf = NormalFormSentence(width, tuple(positives), tuple(negatives), full_sig, fresh_map, residue)
    check_uniform(nf)
    return nf


def _not_fluted(report) -> NotFlutedError:
    bad = ", ".join(a for a, _ in report.offending_atoms) or "?"
    return NotFlutedError(f"sentence is not fluted (offending atoms: {bad})")


def branch_nullary(nf: NormalFormSentence, limit: int = 20) -> list:
    """All nullary-free instances whose nullary valuation satisfies the residue."""
    nullary = list(nf.nullary_predicates)
    if len(nullary) > limit:
        raise ValueError(f"{len(nullary)} nullary predicates exceed the branching limit {limit}")
    out = []

    def rec(i: int, values: dict):
        known = qf_eval3(nf.residue, lambda a: values.get(a.pred) if a.arity == 0 else None)
        if known is False:
            return
        if i == len(nullary):
            out.append(_instantiate(nf, dict(values)))
            return
        for v in (False, True):
            values[nullary[i]] = v
            rec(i + 1, values)
            del values[nullary[i]]

    rec(0, {})
    return out


def _instantiate(nf: NormalFormSentence, values: dict) -> NormalFormSentence:
    pos, negs = [], []
    for target, items in ((pos, nf.positives), (negs, nf.negatives)):
        for c in items:
            guard = qf_substitute(c.guard, values)
            if isinstance(guard, Bottom):
                continue
            target.append(Conjunct(guard, c.count, qf_substitute(c.body, values)))
    sig = nf.signature.without(values)
    return NormalFormSentence(nf.width, tuple(pos), tuple(negs), sig, nf.fresh_map, TRUE,
                              {**nf.nullary_values, **values})
