"""Fluted atom bases, fluted types and profiles.

A type at depth l is a bit vector over the depth-l basis; atom i of the basis
is bit (k - 1 - i) of the integer code, so numeric order on codes is the
lexicographic order of assignments (false < true) along the basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Optional

from .diophantine.arith import ExtNat, linear_set_member
from .normalform import EQ, FlutedAtom, is_eq, qf_atoms, qf_eval
from .syntax import CountSpec, Formula, Signature

DEFAULT_TYPE_CAP = 24


class TypeSpaceTooLarge(RuntimeError):
    """A basis exceeds the enumeration cap."""


@dataclass(frozen=True, order=True)
class AtomBasis:
    depth: int
    atoms: tuple

    @property
    def size(self) -> int:
        return len(self.atoms)

    def index(self, atom: FlutedAtom) -> int:
        return self._positions()[atom]

    def _positions(self) -> dict:
        cached = self.__dict__.get("_pos")
        if cached is None:
            cached = {a: i for i, a in enumerate(self.atoms)}
            object.__setattr__(self, "_pos", cached)
        return cached

    def __contains__(self, atom) -> bool:
        return atom in self._positions()

    def describe(self) -> list:
        from .normalform import qf_to_formula
        from .syntax import print_formula
        return [print_formula(qf_to_formula(a, self.depth)) for a in self.atoms]


def atom_basis(sig: Signature, depth: int) -> AtomBasis:
    """Suffix atoms of arity 1..depth, by predicate name, then equality (depth >= 2)."""
    if depth < 1:
        raise ValueError("basis depth must be at least 1")
    atoms = [FlutedAtom(name, a) for name, a in sig.predicates if 1 <= a <= depth]
    atoms.sort(key=lambda a: a.pred)
    if depth >= 2:
        atoms.append(EQ)
    return AtomBasis(depth, tuple(atoms))


@dataclass(frozen=True, order=True)
class FlutedType:
    code: int
    basis: AtomBasis

    def __post_init__(self):
        if not 0 <= self.code < (1 << self.basis.size):
            raise ValueError("type code out of range")

    def value(self, atom: FlutedAtom) -> bool:
        k = self.basis.size
        return bool(self.code >> (k - 1 - self.basis.index(atom)) & 1)

    def assignment(self) -> dict:
        return {a: self.value(a) for a in self.basis.atoms}

    @property
    def has_equality(self) -> bool:
        return EQ in self.basis and self.value(EQ)

    def satisfies(self, phi: Formula) -> bool:
        return type_satisfies(self, phi)

    def __repr__(self) -> str:
        bits = "".join("1" if self.value(a) else "0" for a in self.basis.atoms)
        return f"FlutedType(d={self.basis.depth}, {bits or '-'})"


def type_from_values(basis: AtomBasis, values: Mapping[FlutedAtom, bool]) -> FlutedType:
    k = basis.size
    code = 0
    for i, a in enumerate(basis.atoms):
        if values[a]:
            code |= 1 << (k - 1 - i)
    return FlutedType(code, basis)


def check_cap(basis: AtomBasis, cap: Optional[int] = None) -> None:
    cap = DEFAULT_TYPE_CAP if cap is None else cap
    if basis.size > cap:
        raise TypeSpaceTooLarge(f"basis of {basis.size} atoms exceeds the cap of {cap}")


def enumerate_types(basis: AtomBasis, cap: Optional[int] = None) -> list:
    check_cap(basis, cap)
    return [FlutedType(c, basis) for c in range(1 << basis.size)]


def iter_types(basis: AtomBasis) -> Iterator[FlutedType]:
    for c in range(1 << basis.size):
        yield FlutedType(c, basis)


def restrict_type(tau: FlutedType, lower: Optional[AtomBasis] = None) -> FlutedType:
    """Drop the full-arity atoms of ``tau`` (depth l+1) and read the rest at depth l."""
    d = tau.basis.depth
    if d < 2:
        raise ValueError("cannot restrict a depth-1 type")
    if lower is None:
        lower = lower_basis(tau.basis)
    values = {a: tau.value(a) for a in lower.atoms}
    return type_from_values(lower, values)


def lower_basis(basis: AtomBasis) -> AtomBasis:
    d = basis.depth
    return AtomBasis(d - 1, tuple(a for a in basis.atoms if a.arity < d and not (is_eq(a) and d == 2)))


def type_satisfies(tau: FlutedType, phi: Formula) -> bool:
    for a in qf_atoms(phi):
        if a not in tau.basis:
            raise ValueError(f"atom {a} is not in the depth-{tau.basis.depth} basis")
    return qf_eval(phi, tau.value)


def compute_ftp(structure, tup: tuple, basis: AtomBasis) -> FlutedType:
    """The fluted type of ``tup`` (length = basis depth) in ``structure``."""
    if len(tup) != basis.depth:
        raise ValueError("tuple length must equal the basis depth")
    values = {}
    for a in basis.atoms:
        if is_eq(a):
            values[a] = tup[-2] == tup[-1]
        else:
            values[a] = structure.holds(a.pred, tup[len(tup) - a.arity:])
    return type_from_values(basis, values)


def atom_value_in(structure, atom: FlutedAtom, tup: tuple) -> bool:
    if is_eq(atom):
        return tup[-2] == tup[-1]
    return structure.holds(atom.pred, tup[len(tup) - atom.arity:])


class Profile(dict):
    """(l+1)-type -> multiplicity; absent types count 0."""

    def __missing__(self, key):
        return 0

    def total(self) -> ExtNat:
        s = 0
        for v in self.values():
            s = s + v
        return s

    def count(self, phi: Formula) -> ExtNat:
        s = 0
        for tau, k in self.items():
            if k and type_satisfies(tau, phi):
                s = s + k
        return s


def compute_profile(structure, tup: tuple, basis: AtomBasis) -> Profile:
    """Per (l+1)-type, the number of c with ftp(tup + (c,)) equal to it."""
    if basis.depth != len(tup) + 1:
        raise ValueError("profile basis must have depth len(tup) + 1")
    prof = Profile()
    for c in range(structure.domain):
        tau = compute_ftp(structure, tuple(tup) + (c,), basis)
        prof[tau] = prof.get(tau, 0) + 1
    return prof


def profile_satisfies(rho: Profile, count: CountSpec, phi: Formula) -> bool:
    return linear_set_member(rho.count(phi), count.n, count.p)
