"""Two-variable decision procedure: the clause system over 1-type sizes and
profile counts, model extraction from homogeneous structures and model
construction from solutions.

Variables (named from type codes and conjunct positions):

* ``x{pi}``        number of elements of 1-type pi
* ``y{pi}_{tau}``  number of c emitted by an element of type pi with ftp(a, c) = tau
* ``i{pi}_{r}``    period counter of positive conjunct r (finite only)
* ``j{pi}_{t}``    period counter of negative conjunct t (finite only)
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .diophantine import (INF, OVER_N, OVER_NSTAR, Clause, LinExpr, SolveStats, System,
                          check_assignment, clause, cmp, solve)
from .diophantine.arith import format_extnat, is_inf, parse_extnat
from .normalform import EQ, Conjunct, NormalFormSentence, is_eq, polarities, qf_atoms, qf_eval3
from .typespace import (DEFAULT_TYPE_CAP, AtomBasis, TypeSpaceTooLarge, FlutedType, atom_basis, check_cap, compute_ftp,
                        compute_profile, enumerate_types, restrict_type, type_from_values,
                        type_satisfies)


class EncodingError(ValueError):
    """The normal form does not fit the two-variable encoding."""


@dataclass
class PsiEncoding:
    """The clause system plus the bookkeeping needed to read solutions back."""

    nf: NormalFormSentence
    finite: Optional[bool]
    prune: bool
    basis1: AtomBasis
    basis2: AtomBasis
    one_types: list
    live: list                      # 1-types not excluded by pruning
    emitted: dict                   # pi -> list of admissible 2-types
    endpoint: dict                  # tau -> 1-type
    system: System
    dropped: dict = field(default_factory=dict)   # pi -> binary atoms fixed to false

    def x(self, pi: FlutedType) -> str:
        return f"x{pi.code}"

    def y(self, pi: FlutedType, tau: FlutedType) -> str:
        return f"y{pi.code}_{tau.code}"

    def i(self, pi: FlutedType, r: int) -> str:
        return f"i{pi.code}_{r}"

    def j(self, pi: FlutedType, t: int) -> str:
        return f"j{pi.code}_{t}"

    def canonical(self, pi: FlutedType, tau: FlutedType) -> FlutedType:
        """``tau`` with the atoms that pruning fixes to false switched off."""
        drop = self.dropped.get(pi)
        if not drop:
            return tau
        values = tau.assignment()
        for a in drop:
            values[a] = False
        return type_from_values(self.basis2, values)

    def sizes(self) -> dict:
        return {
            "one_types": len(self.one_types),
            "live_one_types": len(self.live),
            "two_types": 1 << self.basis2.size,
            "y_variables": sum(len(v) for v in self.emitted.values()),
            "variables": len(self.system.variables),
            "clauses": len(self.system.clauses),
        }


def _check_shape(nf: NormalFormSentence) -> None:
    if nf.width != 2:
        raise EncodingError(f"expected width 2, got {nf.width}")
    if nf.nullary_predicates:
        raise EncodingError("nullary predicates must be branched away first")
    if nf.signature.max_arity > 2:
        raise EncodingError("predicates of arity > 2 cannot occur at width 2")


def _hard(pos: bool, c: Conjunct, finite: Optional[bool]) -> bool:
    """Conjuncts that forbid every witness of their body."""
    if pos:
        return c.is_hard
    return bool(finite) and (c.count.n, c.count.p) == (1, 1)


def encode_psi(nf: NormalFormSentence, prune: bool = True, finite: Optional[bool] = None,
               cap: Optional[int] = None) -> PsiEncoding:
    """Build the clause system for a nullary-free width-2 normal form.

    With ``prune`` the admissible 2-types per 1-type are restricted first:
    types violating a hard conjunct are dropped, binary atoms that only help
    to violate hard conjuncts are fixed to false, and 1-types without an
    admissible equality type are excluded.  ``finite`` lets negative
    conjuncts with count 1+1 count as hard (they forbid all finite witnesses).
    """
    _check_shape(nf)
    sig = nf.signature
    b1 = atom_basis(sig, 1)
    b2 = atom_basis(sig, 2)
    check_cap(b1, cap)
    ones = enumerate_types(b1, cap)
    conj = nf.conjuncts
    endpoint: dict = {}
    emitted: dict = {}
    dropped: dict = {}
    live = []
    for pi in ones:
        applicable = [(pos, c) for pos, c in conj if type_satisfies(pi, c.guard)]
        if prune:
            hard = [c.body for pos, c in applicable if _hard(pos, c, finite)]
            soft = [c.body for pos, c in applicable if not _hard(pos, c, finite)]
        else:
            hard, soft = [], []
        drop = _droppable(b2, hard, soft) if prune else set()
        taus = _admissible(b2, drop, hard, cap)
        taus.sort()
        for tau in taus:
            if tau not in endpoint:
                endpoint[tau] = restrict_type(tau, b1)
        if prune:
            taus = [t for t in taus if not (t.value(EQ) and endpoint[t] != pi)]
            if not any(t.value(EQ) for t in taus):
                emitted[pi] = []
                continue
        emitted[pi] = taus
        dropped[pi] = tuple(sorted(drop))
        live.append(pi)
    if prune:
        alive = set(live)
        for pi in live:
            emitted[pi] = [t for t in emitted[pi] if endpoint[t] in alive]

    enc = PsiEncoding(nf, finite, prune, b1, b2, ones, live, emitted, endpoint,
                      System((), ()), dropped)
    enc.system = _clauses(enc)
    return enc


def _admissible(b2: AtomBasis, drop: set, hard: list, cap: Optional[int]) -> list:
    """2-types with ``drop`` atoms false that satisfy no hard body (DFS with 3-valued cuts)."""
    in_hard = set()
    for h in hard:
        in_hard |= qf_atoms(h)
    free = sorted((a for a in b2.atoms if a not in drop),
                  key=lambda a: (a not in in_hard, b2.index(a)))
    limit = 1 << (DEFAULT_TYPE_CAP if cap is None else cap)
    values = dict.fromkeys(drop, False)
    look = values.get
    out = []

    def rec(i: int) -> None:
        if any(qf_eval3(h, look) is True for h in hard):
            return
        if i == len(free):
            out.append(type_from_values(b2, values))
            if len(out) > limit:
                raise TypeSpaceTooLarge(f"more than {limit} admissible 2-types")
            return
        a = free[i]
        for v in (False, True):
            values[a] = v
            rec(i + 1)
        del values[a]

    rec(0)
    return out


def _droppable(b2: AtomBasis, hard: list, soft: list) -> set:
    binary = [a for a in b2.atoms if a.arity == 2 and not is_eq(a)]
    in_soft = set()
    for body in soft:
        in_soft |= qf_atoms(body)
    out = set()
    for a in binary:
        if a in in_soft:
            continue
        if all(polarities(h).get(a, {1}) == {1} for h in hard):
            out.add(a)
    return out


def _clauses(enc: PsiEncoding) -> System:
    variables: list = []
    finite_only: set = set()
    clauses: list = []
    ones = enc.one_types
    xs = {pi: enc.x(pi) for pi in ones}
    variables += [xs[pi] for pi in ones]
    ys = {}
    for pi in enc.live:
        for tau in enc.emitted[pi]:
            ys[pi, tau] = enc.y(pi, tau)
            variables.append(ys[pi, tau])

    def guard(pi):
        return cmp(xs[pi], "=", 0)

    # nonempty domain
    clauses.append(clause(cmp(LinExpr.sum_of(xs[pi] for pi in ones), ">=", 1)))
    live = set(enc.live)
    for pi in ones:
        if pi not in live:
            clauses.append(clause(guard(pi)))
    # witnesses for 2-types: the row of pi, restricted to endpoint pi', has x_{pi'} entries
    for pi in enc.live:
        by_end: dict = {}
        for tau in enc.emitted[pi]:
            by_end.setdefault(enc.endpoint[tau], []).append(ys[pi, tau])
        for pi2 in ones:
            names = by_end.get(pi2, [])
            clauses.append(clause(guard(pi), cmp(LinExpr.sum_of(names), "=", xs[pi2])))
    # positive conjuncts
    for r, c in enumerate(enc.nf.positives):
        for pi in enc.live:
            if not type_satisfies(pi, c.guard):
                continue
            names = [ys[pi, t] for t in enc.emitted[pi] if type_satisfies(t, c.body)]
            total = LinExpr.sum_of(names)
            n, p = c.count.n, c.count.p
            if p:
                iv = enc.i(pi, r)
                variables.append(iv)
                finite_only.add(iv)
                rhs = LinExpr.of({iv: p}, n)
            else:
                rhs = LinExpr.constant(n)
            clauses.append(clause(guard(pi), cmp(total, "=", rhs)))
    # negative conjuncts
    for t_idx, c in enumerate(enc.nf.negatives):
        for pi in enc.live:
            if not type_satisfies(pi, c.guard):
                continue
            names = [ys[pi, t] for t in enc.emitted[pi] if type_satisfies(t, c.body)]
            total = LinExpr.sum_of(names)
            n, p = c.count.n, c.count.p
            base = [guard(pi), cmp(total, "<", n), cmp(total, "=", INF)]
            if p == 0:
                clauses.append(clause(*base, cmp(total, ">", n)))
            else:
                jv = enc.j(pi, t_idx)
                variables.append(jv)
                finite_only.add(jv)
                clauses.append(clause(*base, cmp(LinExpr.of({jv: p}, n), "<", total)))
                clauses.append(clause(*base, cmp(total, "<", LinExpr.of({jv: p}, n + p))))
    # equality: a is its own unique equal extension
    for pi in enc.live:
        eq_names = []
        for tau in enc.emitted[pi]:
            if tau.value(EQ):
                if enc.endpoint[tau] != pi:
                    clauses.append(clause(cmp(ys[pi, tau], "=", 0)))
                else:
                    eq_names.append(ys[pi, tau])
        clauses.append(clause(guard(pi), cmp(LinExpr.sum_of(eq_names), "=", 1)))
    return System(tuple(variables), tuple(clauses), frozenset(finite_only))


# solving

@dataclass
class Sat2Result:
    sat: bool
    encoding: PsiEncoding
    assignment: Optional[dict] = None
    stats: Optional[SolveStats] = None


def decide2(nf: NormalFormSentence, finite: bool, prune: bool = True, *, backend: Optional[str] = None,
            time_limit: Optional[float] = None, max_nodes: Optional[int] = None,
            prefer_finite: bool = True, cap: Optional[int] = None) -> Sat2Result:
    """Satisfiability of a width-2 normal form (finite models when ``finite``)."""
    enc = encode_psi(nf, prune=prune, finite=finite, cap=cap)
    stats = SolveStats()
    stats.extra.update(enc.sizes())
    minimize = [enc.x(pi) for pi in enc.one_types]
    sol = solve(enc.system, OVER_N if finite else OVER_NSTAR, backend=backend, time_limit=time_limit,
                max_nodes=max_nodes, prefer_finite=prefer_finite, minimize=minimize, stats=stats)
    return Sat2Result(sol is not None, enc, sol, stats)


# models and assignments

def one_types_of(structure, basis1: AtomBasis) -> list:
    return [compute_ftp(structure, (a,), basis1) for a in range(structure.domain)]


def is_globally_homogeneous(structure, sig=None) -> bool:
    """Elements of equal 1-type have equal profiles."""
    sig = sig if sig is not None else structure.signature()
    b1, b2 = atom_basis(sig, 1), atom_basis(sig, 2)
    seen: dict = {}
    for a in range(structure.domain):
        pi = compute_ftp(structure, (a,), b1)
        prof = compute_profile(structure, (a,), b2)
        if seen.setdefault(pi, prof) != prof:
            return False
    return True


def globally_homogenize(structure, sig=None):
    """Make every element impersonate the least element of its 1-type."""
    sig = sig if sig is not None else structure.signature()
    if sig.max_arity > 2:
        raise ValueError("global homogenization is defined for arity <= 2")
    b1 = atom_basis(sig, 1)
    exemplar: dict = {}
    for a in range(structure.domain):
        exemplar.setdefault(compute_ftp(structure, (a,), b1), a)
    binary = [name for name, ar in sig.predicates if ar == 2]
    updates = {}
    for name in binary:
        old = structure.tuples(name)
        new = set()
        for b in range(structure.domain):
            a = exemplar[compute_ftp(structure, (b,), b1)]
            for c in range(structure.domain):
                if b == a:
                    src = (b, c)
                elif c == b:
                    src = (a, a)
                elif c == a:
                    src = (a, b)
                else:
                    src = (a, c)
                if src in old:
                    new.add((b, c))
        updates[name] = (2, new)
    return structure.with_relations(updates)


def assignment_from_model(structure, enc: PsiEncoding) -> dict:
    """Read x, y, i, j off a globally homogeneous model."""
    nf = enc.nf
    if not is_globally_homogeneous(structure, nf.signature):
        raise ValueError("model is not globally homogeneous")
    types = one_types_of(structure, enc.basis1)
    out = {v: 0 for v in enc.system.variables}
    rows = {}
    for a, pi in enumerate(types):
        out[enc.x(pi)] += 1
        rows.setdefault(pi, a)
    for pi, a in rows.items():
        prof = compute_profile(structure, (a,), enc.basis2)
        for tau, k in prof.items():
            name = enc.y(pi, enc.canonical(pi, tau))
            if name not in out:
                raise ValueError(f"model realizes a 2-type excluded by the encoding ({name})")
            out[name] += k
        for r, c in enumerate(nf.positives):
            if c.count.p and type_satisfies(pi, c.guard):
                total = prof.count(c.body)
                out[enc.i(pi, r)] = max(0, (total - c.count.n) // c.count.p)
        for t, c in enumerate(nf.negatives):
            if c.count.p and type_satisfies(pi, c.guard):
                total = prof.count(c.body)
                out[enc.j(pi, t)] = max(0, (total - c.count.n) // c.count.p)
    return out


@dataclass
class AbstractModel:
    """A possibly infinite globally homogeneous model given by cardinalities and profiles."""

    sizes: dict                     # 1-type -> ExtNat
    profiles: dict                  # 1-type -> {2-type: ExtNat}
    encoding: Optional[PsiEncoding] = field(default=None, repr=False)
    assignment: Optional[dict] = field(default=None, repr=False)

    @property
    def is_infinite(self) -> bool:
        return any(is_inf(v) for v in self.sizes.values())

    def verify(self, nf: Optional[NormalFormSentence] = None) -> bool:
        """Check the profile semantics directly (and the clause system if known)."""
        if self.encoding is not None and self.assignment is not None:
            if not check_assignment(self.encoding.system, self.assignment):
                return False
        nf = nf or (self.encoding.nf if self.encoding else None)
        if nf is None:
            raise ValueError("no sentence to verify against")
        if not any(v != 0 for v in self.sizes.values()):
            return False
        for pi, size in self.sizes.items():
            if size == 0:
                continue
            prof = self.profiles.get(pi, {})
            by_end: dict = {}
            eq = 0
            for tau, k in prof.items():
                end = restrict_type(tau)
                by_end[end] = by_end.get(end, 0) + k
                if tau.value(EQ) and k:
                    if end != pi:
                        return False
                    eq = eq + k
            if eq != 1:
                return False
            for pi2, size2 in self.sizes.items():
                if by_end.get(pi2, 0) != size2:
                    return False
            for pos, c in nf.conjuncts:
                if not type_satisfies(pi, c.guard):
                    continue
                total = 0
                for tau, k in prof.items():
                    if k and type_satisfies(tau, c.body):
                        total = total + k
                if c.count.contains(total) != pos:
                    return False
        return True

    def to_json(self) -> dict:
        return {
            "abstract": True,
            "basis1": [a.pred for a in next(iter(self.sizes)).basis.atoms] if self.sizes else [],
            "types": [
                {"type": pi.code, "size": format_extnat(size),
                 "profile": {str(t.code): format_extnat(k) for t, k in sorted(self.profiles.get(pi, {}).items()) if k != 0}}
                for pi, size in sorted(self.sizes.items()) if size != 0
            ],
        }


def build_model(sol: Mapping, enc: PsiEncoding):
    """A finite Structure from a finite solution; an AbstractModel otherwise."""
    if not check_assignment(enc.system, sol):
        raise ValueError("assignment does not satisfy the encoding")
    sizes = {pi: sol[enc.x(pi)] for pi in enc.one_types}
    profiles = {pi: {tau: sol[enc.y(pi, tau)] for tau in enc.emitted.get(pi, [])}
                for pi in enc.one_types if sizes[pi] != 0}
    infinite = any(is_inf(v) for v in sizes.values()) or any(
        is_inf(k) for prof in profiles.values() for k in prof.values())
    if infinite:
        model = AbstractModel(sizes, profiles, enc, dict(sol))
        if not model.verify():
            raise ValueError("abstract model fails verification")
        return model
    return _explicit(sizes, profiles, enc)


def _explicit(sizes: dict, profiles: dict, enc: PsiEncoding):
    from .modeltools.structure import Relation, Structure
    blocks: dict = {}
    nxt = 0
    for pi in enc.one_types:
        blocks[pi] = list(range(nxt, nxt + sizes[pi]))
        nxt += sizes[pi]
    sig = enc.nf.signature
    rels = {name: set() for name, _ in sig.predicates}
    for pi, elems in blocks.items():
        for atom in enc.basis1.atoms:
            if pi.value(atom):
                for a in elems:
                    rels[atom.pred].add((a,))
    binary = [a for a in enc.basis2.atoms if a.arity == 2 and not is_eq(a)]
    for pi, elems in blocks.items():
        if not elems:
            continue
        prof = profiles[pi]
        by_end: dict = {}
        for tau in sorted(prof):
            by_end.setdefault(enc.endpoint[tau], []).extend([tau] * prof[tau])
        for a in elems:
            for pi2, taus in by_end.items():
                targets = blocks[pi2]
                eq = [t for t in taus if t.value(EQ)]
                rest = [t for t in taus if not t.value(EQ)]
                if pi2 == pi:
                    pairs = [(a, eq[0])] + list(zip([c for c in targets if c != a], rest))
                else:
                    pairs = list(zip(targets, rest))
                for c, tau in pairs:
                    for atom in binary:
                        if tau.value(atom):
                            rels[atom.pred].add((a, c))
    return Structure(nxt, {name: Relation(ar, rels[name]) for name, ar in sig.predicates})


def abstract_model_from_json(data, enc: PsiEncoding) -> AbstractModel:
    if isinstance(data, str):
        data = json.loads(data)
    by_code1 = {pi.code: pi for pi in enc.one_types}
    sizes = {pi: 0 for pi in enc.one_types}
    profiles = {}
    for item in data["types"]:
        pi = by_code1[item["type"]]
        sizes[pi] = parse_extnat(item["size"])
        profiles[pi] = {FlutedType(int(code), enc.basis2): parse_extnat(k)
                        for code, k in item["profile"].items()}
    return AbstractModel(sizes, profiles)
