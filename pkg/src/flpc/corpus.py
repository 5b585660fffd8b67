"""Formula generators: Diophantine systems encoded as counting sentences,
the grid axioms with their truncated intended models, and random normal forms.
"""
from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .diophantine.arith import ExtNat
from .modeltools.structure import Relation, Structure
from .normalform import EQ, Conjunct, FlutedAtom, NormalFormSentence
from .syntax import (And, Formula, Not, Or, Signature, TRUE, CountSpec, conj, parse_formula)


class CorpusError(ValueError):
    pass


# Diophantine systems

@dataclass(frozen=True)
class DiophEq:
    kind: str           # "one", "add" or "mul"
    variables: tuple    # (u,) or (u, v, w)

    def __post_init__(self):
        if self.kind not in ("one", "add", "mul"):
            raise CorpusError(f"unknown equation kind {self.kind!r}")
        need = 1 if self.kind == "one" else 3
        if len(self.variables) != need:
            raise CorpusError(f"{self.kind} equation needs {need} variables")
        if len(set(self.variables)) != len(self.variables):
            raise CorpusError(f"variables of {self} must be mutually distinct")
        for v in self.variables:
            if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", v):
                raise CorpusError(f"bad variable name {v!r}")

    def holds(self, sol: Mapping[str, int]) -> bool:
        if self.kind == "one":
            return sol[self.variables[0]] == 1
        u, v, w = (sol[x] for x in self.variables)
        return u + v == w if self.kind == "add" else u * v == w

    def __str__(self) -> str:
        if self.kind == "one":
            return f"{self.variables[0]} = 1"
        u, v, w = self.variables
        return f"{u} {'+' if self.kind == 'add' else '*'} {v} = {w}"


@dataclass(frozen=True)
class DiophSystem:
    equations: tuple

    @property
    def variables(self) -> tuple:
        seen = []
        for e in self.equations:
            for v in e.variables:
                if v not in seen:
                    seen.append(v)
        return tuple(seen)

    def holds(self, sol: Mapping[str, int]) -> bool:
        return all(e.holds(sol) for e in self.equations)

    def __str__(self) -> str:
        return "\n".join(str(e) for e in self.equations)


_EQ_RE = [
    (re.compile(r"^\s*(\w+)\s*=\s*1\s*$"), "one"),
    (re.compile(r"^\s*(\w+)\s*\+\s*(\w+)\s*=\s*(\w+)\s*$"), "add"),
    (re.compile(r"^\s*(\w+)\s*\*\s*(\w+)\s*=\s*(\w+)\s*$"), "mul"),
]


def parse_dioph(text: str) -> DiophSystem:
    """One equation per line: ``u = 1``, ``u + v = w`` or ``u * v = w``."""
    eqs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for rx, kind in _EQ_RE:
            m = rx.match(line)
            if m:
                eqs.append(DiophEq(kind, m.groups()))
                break
        else:
            raise CorpusError(f"line {lineno}: not a simple equation: {line!r}")
    return DiophSystem(tuple(eqs))


def _a(u: str) -> str:
    return f"A_{u}"


def hilbert_signature(system: DiophSystem) -> Signature:
    preds = [(_a(u), 1) for u in system.variables]
    for i, e in enumerate(system.equations):
        if e.kind == "add":
            preds.append((f"R{i}", 2))
        elif e.kind == "mul":
            preds.append((f"P{i}", 3))
    return Signature(tuple(preds))


def hilbert_conjuncts(system: DiophSystem) -> list:
    """Texts of the conjuncts: one group per equation, then pairwise disjointness."""
    parts = []
    for i, e in enumerate(system.equations):
        if e.kind == "one":
            u, = e.variables
            parts.append(f"exists[=1] x ({_a(u)}(x))")
        elif e.kind == "add":
            u, v, w = e.variables
            r = f"R{i}"
            parts.append(f"forall x (({_a(u)}(x) | {_a(v)}(x)) -> exists[=1] y ({_a(w)}(y) & {r}(x,y)))")
            parts.append(f"forall y ({_a(w)}(y) -> exists[=1] x (({_a(u)}(x) | {_a(v)}(x)) & {r}(x,y)))")
        else:
            u, v, w = e.variables
            p = f"P{i}"
            parts.append(f"forall x ({_a(u)}(x) -> forall y ({_a(v)}(y) -> "
                         f"exists[=1] z ({_a(w)}(z) & {p}(x,y,z))))")
            parts.append(f"forall z ({_a(w)}(z) -> exists[=1] y ({_a(v)}(y) & "
                         f"exists x ({_a(u)}(x) & {p}(x,y,z))))")
            parts.append(f"forall z ({_a(w)}(z) -> exists y ({_a(v)}(y) & "
                         f"exists[=1] x ({_a(u)}(x) & {p}(x,y,z))))")
    for u, v in itertools.combinations(system.variables, 2):
        parts.append(f"forall x (!{_a(u)}(x) | !{_a(v)}(x))")
    return parts


def encode_hilbert(system: DiophSystem) -> Formula:
    sig = hilbert_signature(system)
    return conj(*[parse_formula(t, sig) for t in hilbert_conjuncts(system)])


def hilbert_model(system: DiophSystem, sol: Mapping[str, int]) -> Structure:
    """Disjoint blocks of the given sizes with bijections for sums and products."""
    if set(sol) < set(system.variables):
        raise CorpusError("solution does not cover every variable")
    if any(not isinstance(sol[u], int) or sol[u] < 0 for u in system.variables):
        raise CorpusError("solution values must be natural numbers")
    if not system.holds(sol):
        raise CorpusError("assignment does not solve the system")
    blocks = {}
    nxt = 0
    for u in system.variables:
        blocks[u] = list(range(nxt, nxt + sol[u]))
        nxt += sol[u]
    rels = {_a(u): Relation(1, [(a,) for a in blocks[u]]) for u in system.variables}
    for i, e in enumerate(system.equations):
        if e.kind == "add":
            u, v, w = e.variables
            rels[f"R{i}"] = Relation(2, list(zip(blocks[u] + blocks[v], blocks[w])))
        elif e.kind == "mul":
            u, v, w = e.variables
            nv = len(blocks[v])
            rels[f"P{i}"] = Relation(3, [(a, b, blocks[w][ia * nv + ib])
                                         for ia, a in enumerate(blocks[u])
                                         for ib, b in enumerate(blocks[v])])
    return Structure(nxt, rels)


# grid axioms

GRID_SIGNATURE = Signature((
    ("G", 1), ("O", 1), ("H", 2), ("V", 2), ("E_H", 2), ("E_V", 2), ("LeH", 2), ("LeV", 2),
    ("C_H", 3), ("C_V", 3), ("R_H", 4), ("R_V", 4), ("S_H", 4), ("S_V", 4),
))


def _both(template: str) -> str:
    parts = [template.format(X=x) for x in ("H", "V")]
    return " & ".join(f"({p})" for p in parts)


_GRID_TEXT = {
    1: "exists[=1] x (O(x)) & forall x (O(x) -> !G(x))",
    2: "forall x (O(x) -> forall y (!E_H(y,x) & !E_V(y,x)))",
    3: "exists[=1] x (G(x) & forall y (!E_H(x,y) & !E_V(x,y)))",
    4: "forall x (G(x) -> (exists[=1] y (H(x,y) & G(y)) & exists[=1] y (V(x,y) & G(y))))",
    5: _both("forall x forall y forall z (((E_{X}(y,x) | O(x)) & {X}(y,z)) -> "
             "exists[=1] w (E_{X}(z,w) & S_{X}(x,y,z,w)))"),
    6: _both("forall w forall z forall y ((E_{X}(z,w) & {X}(y,z)) -> "
             "exists[=1] x ((E_{X}(y,x) | O(x)) & S_{X}(x,y,z,w)))"),
    7: "(forall x forall y (H(x,y) -> (LeV(x,y) & LeV(y,x)))) & "
       "(forall x forall y (V(x,y) -> (LeH(x,y) & LeH(y,x))))",
    8: _both("forall x forall y ((G(x) & G(y)) -> (Le{X}(x,y) | Le{X}(y,x)))"),
    9: _both("forall x forall y forall z ((Le{X}(y,z) & E_{X}(y,x)) -> "
             "exists[=1] w (E_{X}(z,w) & R_{X}(x,y,z,w)))"),
    10: _both("forall w forall z forall y ((Le{X}(y,z) & E_{X}(z,w)) -> "
              "exists[<=1] x (E_{X}(y,x) & R_{X}(x,y,z,w)))"),
    11: _both("forall w forall z forall y (C_{X}(w,z,y) <-> exists[=1] x (E_{X}(y,x) & R_{X}(x,y,z,w)))"),
    12: _both("forall y forall z ((G(y) & G(z) & forall w (E_{X}(z,w) -> C_{X}(w,z,y))) -> Le{X}(z,y))"),
    13: "forall y (G(y) -> exists[=1] z (LeH(y,z) & LeH(z,y) & LeV(y,z) & LeV(z,y)))",
}
_CHI_TEXT = _both("forall x exists[0+1] y (E_{X}(x,y))")

GRID_BOUNDARY_INSENSITIVE = (1, 2, 3, 7, 8, 13)
GRID_BOUNDARY_SENSITIVE = (4, 5, 6, 9, 10, 11, 12)


def grid_conjunct(k: int) -> Formula:
    """The k-th grid axiom (1..13)."""
    if k not in _GRID_TEXT:
        raise CorpusError(f"no grid conjunct {k}")
    return parse_formula(_GRID_TEXT[k], GRID_SIGNATURE)


def grid_chi() -> Formula:
    return parse_formula(_CHI_TEXT, GRID_SIGNATURE)


def encode_grid_axioms(with_chi: bool = False) -> Formula:
    parts = [grid_conjunct(k) for k in range(1, 14)]
    if with_chi:
        parts.append(grid_chi())
    return And(tuple(parts))


@dataclass(frozen=True)
class GridTruncation:
    n: int
    structure: Structure

    def cell(self, i: int, j: int) -> int:
        return i * self.n + j

    def counter(self, k: int) -> int:
        return self.n * self.n + k


def truncated_grid_expansion(n: int) -> Structure:
    return grid_truncation(n).structure


def grid_truncation(n: int) -> GridTruncation:
    """The ordered, mapped, graphed grid cut to cells [0,n)^2 and counters 0..n-1.

    H steps the first coordinate and V the second, so that the number of
    E_H-successors of cell (i, j) is i and of E_V-successors is j.
    """
    if n < 1:
        raise CorpusError("grid side must be positive")
    cells = [(i, j) for i in range(n) for j in range(n)]
    cell = {c: c[0] * n + c[1] for c in cells}
    ctr = {k: n * n + k for k in range(n)}
    deg = {"H": lambda c: c[0], "V": lambda c: c[1]}
    rels: dict = {name: set() for name in GRID_SIGNATURE.names}
    rels["G"] = {(cell[c],) for c in cells}
    rels["O"] = {(ctr[0],)}
    for (i, j) in cells:
        if i + 1 < n:
            rels["H"].add((cell[i, j], cell[i + 1, j]))
        if j + 1 < n:
            rels["V"].add((cell[i, j], cell[i, j + 1]))
    for X in ("H", "V"):
        d = deg[X]
        for c in cells:
            for k in range(1, d(c) + 1):
                rels[f"E_{X}"].add((cell[c], ctr[k]))
        for c, c2 in itertools.product(cells, repeat=2):
            if d(c) <= d(c2):
                rels[f"Le{X}"].add((cell[c], cell[c2]))
                for k in range(1, d(c) + 1):
                    rels[f"R_{X}"].add((ctr[k], cell[c], cell[c2], ctr[k]))
                    rels[f"C_{X}"].add((ctr[k], cell[c2], cell[c]))
            if d(c2) == d(c) + 1:
                for k in range(1, d(c2) + 1):
                    rels[f"S_{X}"].add((ctr[k - 1], cell[c], cell[c2], ctr[k]))
    arity = GRID_SIGNATURE.as_dict()
    return GridTruncation(n, Structure(n * n + n, {name: Relation(arity[name], t) for name, t in rels.items()}))


def grid_degree(trunc: GridTruncation, i: int, j: int, X: str = "H") -> int:
    a = trunc.cell(i, j)
    return sum(1 for t in trunc.structure.tuples(f"E_{X}") if t[0] == a)


# random normal forms

def random_qf(rng: random.Random, atoms: Sequence[FlutedAtom], depth: int = 2) -> Formula:
    """A small random Boolean combination of the given atoms."""
    if not atoms:
        return TRUE if rng.random() < 0.5 else Not(TRUE)
    if depth == 0 or rng.random() < 0.45:
        a = rng.choice(list(atoms))
        return Not(a) if rng.random() < 0.5 else a
    k = rng.choice((2, 2, 3))
    args = tuple(random_qf(rng, atoms, depth - 1) for _ in range(k))
    return And(args) if rng.random() < 0.5 else Or(args)


def basis_atoms(sig: Signature, depth: int) -> list:
    atoms = [FlutedAtom(n, a) for n, a in sig.predicates if 1 <= a <= depth]
    if depth >= 2:
        atoms.append(EQ)
    return atoms


def random_normal_form(rng: random.Random, sig: Signature, width: int = 2, *,
                       max_pos: int = 2, max_neg: int = 2, max_n: int = 3, max_p: int = 3,
                       guard_true: float = 0.4) -> NormalFormSentence:
    """Random normal form over ``sig`` with counts n, p <= max_n, max_p."""
    l = width - 1
    gatoms = basis_atoms(sig, l)
    batoms = basis_atoms(sig, width)

    def conjunct():
        guard = TRUE if rng.random() < guard_true or not gatoms else random_qf(rng, gatoms, 1)
        count = CountSpec(rng.randint(0, max_n), rng.randint(0, max_p))
        return Conjunct(guard, count, random_qf(rng, batoms, 2))

    pos = tuple(conjunct() for _ in range(rng.randint(0, max_pos)))
    neg = tuple(conjunct() for _ in range(rng.randint(0 if pos else 1, max_neg)))
    return NormalFormSentence(width, pos, neg, sig)
