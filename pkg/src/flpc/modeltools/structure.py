"""Finite relational structures over the domain {0, ..., n-1}."""
from __future__ import annotations

import json
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Optional

from ..syntax import Signature


class StructureError(ValueError):
    """Malformed structure data."""


@dataclass(frozen=True)
class Relation:
    arity: int
    tuples: frozenset

    def __post_init__(self):
        object.__setattr__(self, "tuples", frozenset(tuple(t) for t in self.tuples))
        for t in self.tuples:
            if len(t) != self.arity:
                raise StructureError(f"tuple {t} does not match arity {self.arity}")


class Structure:
    """Immutable finite structure.  Equality is identity and never stored.

    A nullary predicate is a relation of arity 0 holding the empty tuple when
    true.
    """

    __slots__ = ("domain", "_rels", "_hash")

    def __init__(self, domain: int, relations: Mapping[str, object] = ()):
        if isinstance(domain, bool) or not isinstance(domain, int) or domain < 0:
            raise StructureError(f"bad domain size {domain!r}")
        rels = {}
        items = relations.items() if isinstance(relations, Mapping) else relations
        for name, rel in items:
            if not isinstance(rel, Relation):
                arity, tuples = rel
                rel = Relation(arity, tuples)
            for t in rel.tuples:
                if any(not isinstance(e, int) or e < 0 or e >= domain for e in t):
                    raise StructureError(f"tuple {t} of {name} leaves the domain 0..{domain - 1}")
            rels[name] = rel
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "_rels", MappingProxyType(dict(sorted(rels.items()))))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, key, value):
        raise AttributeError("Structure is immutable")

    @classmethod
    def from_sets(cls, domain: int, sets: Mapping[str, Iterable], arities: Optional[Mapping[str, int]] = None):
        """Build from ``{name: tuples}``; arities are inferred unless given."""
        rels = {}
        for name, tuples in sets.items():
            tuples = [t if isinstance(t, tuple) else ((t,) if isinstance(t, int) else tuple(t)) for t in tuples]
            if arities and name in arities:
                arity = arities[name]
            elif tuples:
                arity = len(tuples[0])
            else:
                raise StructureError(f"cannot infer arity of empty relation {name}")
            rels[name] = Relation(arity, tuples)
        for name, arity in (arities or {}).items():
            rels.setdefault(name, Relation(arity, ()))
        return cls(domain, rels)

    @classmethod
    def empty(cls, domain: int, sig: Signature) -> "Structure":
        return cls(domain, {n: Relation(a, ()) for n, a in sig.predicates})

    @property
    def relations(self) -> Mapping[str, Relation]:
        return self._rels

    @property
    def elements(self) -> range:
        return range(self.domain)

    def signature(self) -> Signature:
        return Signature(tuple((n, r.arity) for n, r in self._rels.items()))

    def arity(self, name: str) -> int:
        return self._rels[name].arity

    def tuples(self, name: str) -> frozenset:
        return self._rels[name].tuples

    def holds(self, name: str, tup: tuple = ()) -> bool:
        return tuple(tup) in self._rels[name].tuples

    def value(self, name: str) -> bool:
        return () in self._rels[name].tuples

    def with_relations(self, updates: Mapping[str, object]) -> "Structure":
        rels = dict(self._rels)
        for name, rel in updates.items():
            rels[name] = rel if isinstance(rel, Relation) else Relation(*rel)
        return Structure(self.domain, rels)

    def reduct(self, names: Iterable[str]) -> "Structure":
        keep = set(names)
        return Structure(self.domain, {n: r for n, r in self._rels.items() if n in keep})

    def without(self, names: Iterable[str]) -> "Structure":
        drop = set(names)
        return Structure(self.domain, {n: r for n, r in self._rels.items() if n not in drop})

    def __eq__(self, other) -> bool:
        return isinstance(other, Structure) and self.domain == other.domain and dict(self._rels) == dict(other._rels)

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.domain, tuple(self._rels.items()))))
        return self._hash

    def __repr__(self) -> str:
        parts = ", ".join(f"{n}={sorted(r.tuples)}" if r.arity else f"{n}={bool(r.tuples)}"
                          for n, r in self._rels.items())
        return f"Structure({self.domain}; {parts})"

    # JSON

    def to_json(self) -> dict:
        preds = {}
        for name, rel in self._rels.items():
            if rel.arity == 0:
                preds[name] = {"arity": 0, "value": bool(rel.tuples)}
            else:
                preds[name] = {"arity": rel.arity, "tuples": [list(t) for t in sorted(rel.tuples)]}
        return {"domain": self.domain, "preds": preds}

    @classmethod
    def from_json(cls, data) -> "Structure":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            domain = data["domain"]
            rels = {}
            for name, spec in data.get("preds", {}).items():
                arity = spec["arity"]
                if not isinstance(arity, int) or arity < 0:
                    raise StructureError(f"bad arity for {name}")
                if arity == 0:
                    rels[name] = Relation(0, [()] if spec.get("value", False) else [])
                else:
                    tuples = [tuple(t) for t in spec.get("tuples", [])]
                    rels[name] = Relation(arity, tuples)
        except (KeyError, TypeError) as exc:
            raise StructureError(f"malformed structure JSON: {exc}") from exc
        return cls(domain, rels)


def load_structure(path) -> Structure:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and data.get("abstract"):
        raise StructureError("file holds an abstract (infinite) model, not a finite structure")
    return Structure.from_json(data)


def save_structure(structure: Structure, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(structure.to_json(), fh, indent=1)
        fh.write("\n")
