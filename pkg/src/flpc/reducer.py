"""Variable reduction for fluted normal forms of width >= 3.

One step turns a width-(l+1) normal form into a width-l one over fresh
predicates q (arity l-1) and s (arity l):

* ``q`` marks tails b that have a left extension a of a given kind;
* ``s`` records, for that kind, which top-arity facts hold of a b c.

Two schemes fix what "kind" means.  ``types`` uses the full l-type of a b
(one q per l-type, one s per pair of l-type and (l+1)-type).  ``classes``
groups l-types by which guards they satisfy and splits (l+1)-types only by
their top-arity atoms, reading the rest off the reduced structure directly.
Both are equisatisfiable with the input; ``classes`` is far smaller.
"""
from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .modeltools.evaluate import evaluate
from .modeltools.structure import Relation, Structure
from .normalform import (EQ, Conjunct, FlutedAtom, NormalFormSentence, branch_nullary, exactly_one,
                         qf_atoms, qf_eval, qf_substitute, to_normal_form)
from .sat2 import AbstractModel, build_model, decide2
from .syntax import FALSE, NONE, TRUE, And, CountSpec, Formula, Not, Or, Signature, conj, predicates_of
from .typespace import (AtomBasis, TypeSpaceTooLarge, FlutedType, atom_basis, check_cap, compute_ftp, enumerate_types,
                        restrict_type, type_satisfies)

SCHEMES = ("types", "classes")
_ALL = CountSpec(0, 0)


class ReductionError(ValueError):
    pass


@dataclass
class ReductionStep:
    """Bookkeeping for one reduction; enough to lift models back."""

    width: int                  # source width l+1
    scheme: str
    source: NormalFormSentence
    target_signature: Signature
    top: tuple                  # source predicates of arity l+1
    guards: tuple               # classes scheme: the guard list defining classes
    q_names: dict               # key -> q predicate
    s_names: dict               # (key, sub) -> s predicate
    registry: dict = field(default_factory=dict)   # fresh name -> ("q", key) | ("s", key, sub)
    pruned: int = 0

    @property
    def source_signature(self) -> Signature:
        return self.source.signature

    @property
    def l(self) -> int:
        return self.width - 1

    def key_of(self, structure: Structure, tup: tuple):
        """The kind of an l-tuple a b: its l-type or its guard vector."""
        basis = atom_basis(self.source.signature, self.l)
        pi = compute_ftp(structure, tup, basis)
        if self.scheme == "types":
            return pi.code
        return tuple(type_satisfies(pi, g) for g in self.guards)

    def sizes(self) -> dict:
        return {"width": self.width, "scheme": self.scheme, "q": len(self.q_names),
                "s": len(self.s_names), "pruned": self.pruned}


def _literal_conj(tau: FlutedType) -> Formula:
    return conj(*[a if v else Not(a) for a, v in tau.assignment().items()])


def _disj(items: list) -> Formula:
    if not items:
        return FALSE
    return items[0] if len(items) == 1 else Or(tuple(items))


def _namer(taken: set, width: int):
    prefix = ""
    while any(n.startswith(prefix + f"q{width}k") or n.startswith(prefix + f"s{width}k") for n in taken):
        prefix += "_"
    return lambda kind, *ix: prefix + f"{kind}{width}k" + "v".join(str(i) for i in ix)


def _valid(f: Formula) -> bool:
    atoms = sorted(qf_atoms(f))
    for bits in itertools.product((False, True), repeat=len(atoms)):
        env = dict(zip(atoms, bits))
        if not qf_eval(f, env.__getitem__):
            return False
    return True


def reduce_once(nf: NormalFormSentence, scheme: str = "types", prune: bool = False,
                cap: Optional[int] = None) -> tuple:
    """One width-(l+1) to width-l step; returns (reduced normal form, step)."""
    if scheme not in SCHEMES:
        raise ReductionError(f"unknown scheme {scheme!r}")
    if nf.width < 3:
        raise ReductionError("reduction needs width >= 3")
    if nf.nullary_predicates or not isinstance(nf.residue, type(TRUE)):
        raise ReductionError("branch nullary predicates before reducing")
    l = nf.width - 1
    sig = nf.signature
    if sig.max_arity > l + 1:
        raise ReductionError("signature has predicates wider than the normal form")
    top = tuple(name for name, a in sig.predicates if a == l + 1)
    lower_sig = Signature(tuple((n, a) for n, a in sig.predicates if a <= l))
    name = _namer(set(sig.names), nf.width)
    hard = [(pos, c) for pos, c in nf.conjuncts if pos and c.is_hard]
    if scheme == "types":
        out = _reduce_types(nf, l, top, name, hard, prune, cap)
    else:
        out = _reduce_classes(nf, l, top, name, hard, prune, cap)
    positives, negatives, q_names, s_names, guards, pruned = out
    fresh = [(q, l - 1) for q in q_names.values()] + [(s, l) for s in s_names.values()]
    target_sig = lower_sig.union(Signature(tuple(fresh)))
    reduced = NormalFormSentence(l, tuple(positives), tuple(negatives), target_sig, nf.fresh_map)
    registry = {q: ("q", k) for k, q in q_names.items()}
    registry.update({s: ("s", k, sub) for (k, sub), s in s_names.items()})
    step = ReductionStep(nf.width, scheme, nf, target_sig, top, guards, q_names, s_names, registry, pruned)
    return reduced, step


def _reduce_types(nf, l, top, name, hard, prune, cap):
    sig = nf.signature
    bl, bl1 = atom_basis(sig, l), atom_basis(sig, l + 1)
    check_cap(bl, cap)
    check_cap(bl1, cap)
    pis = enumerate_types(bl, cap)
    taus = enumerate_types(bl1, cap)
    q_names = {pi.code: name("q", pi.code) for pi in pis}
    s_names = {}
    pruned = 0
    for pi in pis:
        for tau in taus:
            if prune and any(type_satisfies(pi, c.guard) and type_satisfies(tau, c.body) for _, c in hard):
                pruned += 1
                continue
            s_names[pi.code, tau.code] = name("s", pi.code, tau.code)
    q = {k: FlutedAtom(v, l - 1) for k, v in q_names.items()}
    s = {k: FlutedAtom(v, l) for k, v in s_names.items()}
    positives, negatives = [], []
    # psi1: pi(x1..xl) -> q_pi(x2..xl)
    for pi in pis:
        positives.append(Conjunct(TRUE, _ALL, conj(_literal_conj(pi), Not(q[pi.code]))))
    # psi2: s determines the l-type of b c, and exactly one s per c under q
    for (pc, tc), atom in s.items():
        below = restrict_type(FlutedType(tc, bl1), bl)
        positives.append(Conjunct(TRUE, _ALL, conj(atom, Not(_literal_conj(below)))))
    for pi in pis:
        row = [s[pi.code, t.code] for t in taus if (pi.code, t.code) in s]
        positives.append(Conjunct(q[pi.code], _ALL, Not(exactly_one(row))))
    # psi3 / psi4
    for pos, c in nf.conjuncts:
        for pi in pis:
            if not type_satisfies(pi, c.guard):
                continue
            body = _disj([s[pi.code, t.code] for t in taus
                          if (pi.code, t.code) in s and type_satisfies(t, c.body)])
            (positives if pos else negatives).append(Conjunct(q[pi.code], c.count, body))
    return positives, negatives, q_names, s_names, (), pruned


def _classes(nf, l, guards, cap):
    bl = atom_basis(nf.signature, l)
    try:
        check_cap(bl, cap)
        seen = set()
        for pi in enumerate_types(bl, cap):
            seen.add(tuple(type_satisfies(pi, g) for g in guards))
        vectors = sorted(seen)
    except TypeSpaceTooLarge:
        if len(guards) > 16:
            raise
        vectors = list(itertools.product((False, True), repeat=len(guards)))
    return [v for v in vectors if any(v)]


def _mentions_head(c: Conjunct, l: int, top: tuple) -> bool:
    """Whether the conjunct depends on x1 (through its guard or a top-arity atom)."""
    for a in qf_atoms(c.guard):
        if a.arity >= l or (a == EQ and l == 2):
            return True
    return any(a.pred in top and a.arity == l + 1 for a in qf_atoms(c.body))


def _reduce_classes(nf, l, top, name, hard, prune, cap):
    core = [(pos, c) for pos, c in nf.conjuncts if _mentions_head(c, l, top)]
    hard = [(pos, c) for pos, c in hard if (pos, c) in core]
    guards = []
    for _, c in core:
        if c.guard not in guards:
            guards.append(c.guard)
    guards = tuple(guards)
    kappas = _classes(nf, l, guards, cap)
    if len(top) > (cap or 24):
        raise ReductionError("too many top-arity predicates")
    vals = list(itertools.product((False, True), repeat=len(top)))
    top_atoms = [FlutedAtom(t, l + 1) for t in top]

    def inst(body, v):
        return qf_substitute(body, dict(zip(top_atoms, v)))

    q_names, s_names = {}, {}
    pruned = 0
    for k, kappa in enumerate(kappas):
        q_names[kappa] = name("q", k)
        for j, v in enumerate(vals):
            if prune and any(kappa[guards.index(c.guard)] and _valid(inst(c.body, v)) for _, c in hard):
                pruned += 1
                continue
            s_names[kappa, v] = name("s", k, j)
    q = {k: FlutedAtom(n, l - 1) for k, n in q_names.items()}
    s = {k: FlutedAtom(n, l) for k, n in s_names.items()}
    # conjuncts that never look at x1 hold at width l as they stand
    positives = [c for pos, c in nf.conjuncts if pos and (pos, c) not in core]
    negatives = [c for pos, c in nf.conjuncts if not pos and (pos, c) not in core]
    for kappa in kappas:
        member = conj(*[g if b else Not(g) for g, b in zip(guards, kappa)])
        positives.append(Conjunct(TRUE, _ALL, conj(member, Not(q[kappa]))))
        row = [s[kappa, v] for v in vals if (kappa, v) in s]
        positives.append(Conjunct(q[kappa], _ALL, Not(exactly_one(row))))
    for pos, c in core:
        gi = guards.index(c.guard)
        for kappa in kappas:
            if not kappa[gi]:
                continue
            parts = []
            for v in vals:
                if (kappa, v) not in s:
                    continue
                b = inst(c.body, v)
                if b != FALSE:
                    parts.append(s[kappa, v] if b == TRUE else conj(s[kappa, v], b))
            (positives if pos else negatives).append(Conjunct(q[kappa], c.count, _disj(parts)))
    return positives, negatives, q_names, s_names, guards, pruned


# homogeneity

def _top_preds(structure: Structure, l: int, sig: Optional[Signature]) -> list:
    sig = sig if sig is not None else structure.signature()
    return [n for n, a in sig.predicates if a == l + 1]


def _type_key(structure: Structure, l: int, sig: Optional[Signature]) -> Callable:
    basis = atom_basis(sig if sig is not None else structure.signature(), l)
    return lambda tup: compute_ftp(structure, tup, basis).code


def is_locally_homogeneous(structure: Structure, l: int, sig: Optional[Signature] = None) -> bool:
    """All a with the same l-type over a tail b emit the same (l+1)-types to every c."""
    if l < 2:
        raise ValueError("local homogeneity needs l >= 2")
    top = _top_preds(structure, l, sig)
    if not top:
        return True
    key = _type_key(structure, l, sig)
    n = structure.domain
    rels = [structure.tuples(t) for t in top]
    for bbar in itertools.product(range(n), repeat=l - 1):
        seen: dict = {}
        for a in range(n):
            k = key((a,) + bbar)
            row = tuple(tuple((a,) + bbar + (c,) in r for r in rels) for c in range(n))
            if seen.setdefault(k, row) != row:
                return False
    return True


def locally_homogenize(structure: Structure, l: int, sig: Optional[Signature] = None,
                       key: Optional[Callable] = None) -> Structure:
    """Copy the top-arity facts of the least a of each kind over b to the others."""
    if l < 2:
        raise ValueError("local homogenization needs l >= 2")
    top = _top_preds(structure, l, sig)
    if not top:
        return structure
    key = key or _type_key(structure, l, sig)
    n = structure.domain
    new = {t: set() for t in top}
    for bbar in itertools.product(range(n), repeat=l - 1):
        exemplar: dict = {}
        for a in range(n):
            e = exemplar.setdefault(key((a,) + bbar), a)
            for t in top:
                old = structure.tuples(t)
                for c in range(n):
                    if (e,) + bbar + (c,) in old:
                        new[t].add((a,) + bbar + (c,))
    return structure.with_relations({t: (l + 1, new[t]) for t in top})


# model transfer

def expand_model(structure: Structure, step: ReductionStep) -> Structure:
    """A model of the source, made homogeneous for the step's kinds, expanded by q and s."""
    l = step.l
    n = structure.domain
    homog = locally_homogenize(structure, l, step.source.signature,
                               key=lambda tup: step.key_of(structure, tup))
    bl1 = atom_basis(step.source.signature, l + 1)
    q_true = {k: set() for k in step.q_names}
    s_true = {k: set() for k in step.s_names}
    for bbar in itertools.product(range(n), repeat=l - 1):
        for a in range(n):
            k = step.key_of(homog, (a,) + bbar)
            if k not in step.q_names:
                continue
            q_true[k].add(bbar)
            for c in range(n):
                tup = (a,) + bbar + (c,)
                if step.scheme == "types":
                    sub = compute_ftp(homog, tup, bl1).code
                else:
                    sub = tuple(homog.holds(t, tup) for t in step.top)
                if (k, sub) not in s_true:
                    raise ReductionError("model realizes a pruned combination")
                s_true[k, sub].add(bbar + (c,))
    updates = {step.q_names[k]: (l - 1, v) for k, v in q_true.items()}
    updates.update({step.s_names[k]: (l, v) for k, v in s_true.items()})
    out = homog.with_relations(updates)
    return out.reduct(step.target_signature.names)


def lift_model(structure: Structure, step: ReductionStep) -> Structure:
    """Rebuild the top-arity facts from the s predicates of a reduced model."""
    l = step.l
    n = structure.domain
    by_key: dict = {}
    for (k, sub), s in step.s_names.items():
        by_key.setdefault(k, []).append((sub, structure.tuples(s)))
    bl1 = atom_basis(step.source.signature, l + 1)
    new = {t: set() for t in step.top}
    top_index = None
    if step.scheme == "types":
        top_index = [bl1.index(FlutedAtom(t, l + 1)) for t in step.top]
    for bbar in itertools.product(range(n), repeat=l - 1):
        for a in range(n):
            k = step.key_of(structure, (a,) + bbar)
            options = by_key.get(k)
            if not options:
                continue
            for c in range(n):
                hits = [sub for sub, ext in options if bbar + (c,) in ext]
                if len(hits) != 1:
                    raise ReductionError(f"{len(hits)} s-facts hold on {bbar + (c,)}")
                sub = hits[0]
                if step.scheme == "types":
                    tau = FlutedType(sub, bl1)
                    val = [tau.value(FlutedAtom(t, l + 1)) for t in step.top]
                else:
                    val = sub
                for t, v in zip(step.top, val):
                    if v:
                        new[t].add((a,) + bbar + (c,))
    base = structure.reduct(nm for nm, a in step.source.signature.predicates if a <= l)
    return base.with_relations({t: (l + 1, new[t]) for t in step.top})


# the decision procedure

@dataclass
class Verdict:
    sat: bool
    finite: bool
    witness: Union[Structure, AbstractModel, None] = None
    verified: Optional[bool] = None
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"verdict": "SAT" if self.sat else "UNSAT",
               "mode": "finite" if self.finite else "general",
               "witness": None, "verified": self.verified, "stats": self.stats}
        if isinstance(self.witness, Structure):
            out["witness"] = self.witness.to_json()
        elif isinstance(self.witness, AbstractModel):
            out["witness"] = self.witness.to_json()
        return out


def _solve_branch(args):
    branch, finite, prune, scheme, backend, time_limit, max_nodes, cap = args
    t0 = time.perf_counter()
    steps = []
    cur = branch
    while cur.width > 2:
        cur, step = reduce_once(cur, scheme=scheme, prune=prune, cap=cap)
        steps.append(step)
    res = decide2(cur, finite, prune=prune, backend=backend, time_limit=time_limit,
                  max_nodes=max_nodes, cap=cap)
    info = {"levels": [s.sizes() for s in steps], "solver": res.stats.as_dict() if res.stats else {},
            "seconds": round(time.perf_counter() - t0, 6)}
    model = None
    if res.sat:
        model = build_model(res.assignment, res.encoding)
        if isinstance(model, Structure):
            for step in reversed(steps):
                model = lift_model(model, step)
        elif steps:
            model = None
    return res.sat, model, info


def decide(s: Union[Formula, NormalFormSentence], finite: bool, prune: bool = True,
           scheme: str = "classes", *, jobs: int = 1, backend: Optional[str] = None,
           time_limit: Optional[float] = None, max_nodes: Optional[int] = None,
           cap: Optional[int] = None, verify: bool = True) -> Verdict:
    """(Finite) satisfiability of a fluted sentence of any width."""
    t0 = time.perf_counter()
    if isinstance(s, NormalFormSentence):
        nf, original = s, s.to_formula()
    else:
        nf, original = to_normal_form(s), s
    branches = branch_nullary(nf)
    stats = {"width": nf.width, "branches": len(branches), "scheme": scheme, "prune": prune,
             "normal_form": {"positives": len(nf.positives), "negatives": len(nf.negatives),
                             "size": nf.size()}}
    jobs_args = [(b, finite, prune, scheme, backend, time_limit, max_nodes, cap) for b in branches]
    if jobs > 1 and len(branches) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_solve_branch, jobs_args))
    else:
        results = []
        for a in jobs_args:
            results.append(_solve_branch(a))
            if results[-1][0]:
                break
    stats["branch_stats"] = [r[2] for r in results]
    for branch, (sat, model, _) in zip(branches, results):
        if not sat:
            continue
        witness, verified = model, None
        if isinstance(model, Structure):
            witness = model.with_relations({q: (0, [()] if v else []) for q, v in branch.nullary_values.items()})
            witness = witness.reduct(predicates_of(original).names)
            if verify:
                verified = evaluate(witness, original)
                if not verified:
                    raise AssertionError("witness fails the original sentence")
        elif isinstance(model, AbstractModel):
            verified = model.verify()
        stats["seconds"] = round(time.perf_counter() - t0, 6)
        return Verdict(True, finite, witness, verified, stats)
    stats["seconds"] = round(time.perf_counter() - t0, 6)
    return Verdict(False, finite, None, None, stats)
