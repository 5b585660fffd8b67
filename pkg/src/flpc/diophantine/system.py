"""Linear comparisons over the extended naturals, clauses and systems."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .arith import INF, ExtNat, check_extnat, format_extnat, parse_extnat

OPS = ("=", "!=", "<=", "<", ">=", ">")
_OP_ALIASES = {"==": "=", "≠": "!=", "≤": "<=", "≥": ">="}

Assignment = dict  # variable name -> ExtNat


@dataclass(frozen=True)
class LinExpr:
    """``sum(coeff * var) + const`` with coefficients in the extended naturals."""

    coeffs: tuple = ()
    const: ExtNat = 0

    def __post_init__(self):
        merged: dict[str, ExtNat] = {}
        for name, c in self.coeffs:
            check_extnat(c)
            merged[name] = merged.get(name, 0) + c
        items = tuple(sorted((k, v) for k, v in merged.items() if v != 0))
        object.__setattr__(self, "coeffs", items)
        check_extnat(self.const)

    @classmethod
    def of(cls, coeffs: Mapping[str, ExtNat] | Iterable = (), const: ExtNat = 0) -> "LinExpr":
        if isinstance(coeffs, Mapping):
            coeffs = coeffs.items()
        return cls(tuple(coeffs), const)

    @classmethod
    def var(cls, name: str, coeff: ExtNat = 1) -> "LinExpr":
        return cls(((name, coeff),), 0)

    @classmethod
    def constant(cls, value: ExtNat) -> "LinExpr":
        return cls((), value)

    @classmethod
    def sum_of(cls, names: Iterable[str], const: ExtNat = 0) -> "LinExpr":
        return cls(tuple((n, 1) for n in names), const)

    def __add__(self, other: "LinExpr | int") -> "LinExpr":
        if not isinstance(other, LinExpr):
            other = LinExpr.constant(other)
        return LinExpr(self.coeffs + other.coeffs, self.const + other.const)

    __radd__ = __add__

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.coeffs)

    def value(self, assignment: Mapping[str, ExtNat]) -> ExtNat:
        total: ExtNat = self.const
        for name, c in self.coeffs:
            v = assignment[name]
            if c == 0 or v == 0:
                continue
            total = total + c * v
        return total

    def __str__(self) -> str:
        parts = []
        for name, c in self.coeffs:
            parts.append(name if c == 1 else f"{format_extnat(c)}*{name}")
        if self.const != 0 or not parts:
            parts.append(str(format_extnat(self.const)))
        return " + ".join(parts)


@dataclass(frozen=True)
class Comparison:
    lhs: LinExpr
    op: str
    rhs: LinExpr

    def __post_init__(self):
        op = _OP_ALIASES.get(self.op, self.op)
        if op not in OPS:
            raise ValueError(f"unknown comparison operator {self.op!r}")
        object.__setattr__(self, "op", op)
        for side in ("lhs", "rhs"):
            val = getattr(self, side)
            if not isinstance(val, LinExpr):
                object.__setattr__(self, side, LinExpr.constant(val))

    @property
    def variables(self) -> set[str]:
        return set(self.lhs.variables) | set(self.rhs.variables)

    def holds(self, assignment: Mapping[str, ExtNat]) -> bool:
        return compare_values(self.lhs.value(assignment), self.op, self.rhs.value(assignment))

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


def compare_values(a: ExtNat, op: str, b: ExtNat) -> bool:
    # INF is the maximum and equals only itself, which realises the INF/FIN table
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<=":
        return a <= b
    if op == "<":
        return a < b
    if op == ">=":
        return a >= b
    if op == ">":
        return a > b
    raise ValueError(op)


@dataclass(frozen=True)
class Clause:
    """A nonempty disjunction of comparisons."""

    comparisons: tuple

    def __post_init__(self):
        comps = tuple(self.comparisons)
        if not comps:
            raise ValueError("a clause needs at least one comparison")
        object.__setattr__(self, "comparisons", comps)

    @property
    def variables(self) -> set[str]:
        out: set[str] = set()
        for c in self.comparisons:
            out |= c.variables
        return out

    def __str__(self) -> str:
        return " | ".join(f"({c})" for c in self.comparisons)


def clause(*comparisons: Comparison) -> Clause:
    return Clause(tuple(comparisons))


def cmp(lhs, op: str, rhs) -> Comparison:
    """Shorthand: strings become variables, ints/INF become constants."""
    return Comparison(_as_expr(lhs), op, _as_expr(rhs))


def _as_expr(x) -> LinExpr:
    if isinstance(x, LinExpr):
        return x
    if isinstance(x, str):
        return LinExpr.var(x)
    return LinExpr.constant(x)


@dataclass(frozen=True)
class System:
    variables: tuple
    clauses: tuple
    finite_only: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        variables = tuple(self.variables)
        if len(set(variables)) != len(variables):
            raise ValueError("duplicate variable names")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "clauses", tuple(self.clauses))
        object.__setattr__(self, "finite_only", frozenset(self.finite_only))
        declared = set(variables)
        for cl in self.clauses:
            missing = cl.variables - declared
            if missing:
                raise ValueError(f"undeclared variables {sorted(missing)}")
        if not self.finite_only <= declared:
            raise ValueError("finite_only mentions undeclared variables")

    def __len__(self) -> int:
        return len(self.clauses)


def eval_constraint(c: Clause | Comparison, assignment: Mapping[str, ExtNat]) -> bool:
    if isinstance(c, Comparison):
        return c.holds(assignment)
    return any(comp.holds(assignment) for comp in c.comparisons)


def check_assignment(system: System, assignment: Mapping[str, ExtNat]) -> bool:
    """Totality, finiteness flags, and every clause."""
    for v in system.variables:
        if v not in assignment:
            return False
        if v in system.finite_only and assignment[v] is INF:
            return False
    return all(eval_constraint(cl, assignment) for cl in system.clauses)


# JSON

def _expr_to_json(e: LinExpr) -> dict:
    return {"coeffs": {k: format_extnat(v) for k, v in e.coeffs}, "const": format_extnat(e.const)}


def _expr_from_json(d) -> LinExpr:
    if isinstance(d, (int, str)):
        return LinExpr.constant(parse_extnat(d))
    return LinExpr.of({k: parse_extnat(v) for k, v in d.get("coeffs", {}).items()},
                      parse_extnat(d.get("const", 0)))


def system_to_json(system: System) -> dict:
    return {
        "variables": list(system.variables),
        "finite_only": sorted(system.finite_only),
        "clauses": [
            [{"lhs": _expr_to_json(c.lhs), "op": c.op, "rhs": _expr_to_json(c.rhs)}
             for c in cl.comparisons]
            for cl in system.clauses
        ],
    }


def system_from_json(data) -> System:
    if isinstance(data, str):
        data = json.loads(data)
    clauses = []
    for raw in data["clauses"]:
        comps = [Comparison(_expr_from_json(c["lhs"]), c["op"], _expr_from_json(c["rhs"])) for c in raw]
        clauses.append(Clause(tuple(comps)))
    return System(tuple(data["variables"]), tuple(clauses), frozenset(data.get("finite_only", ())))


def assignment_to_json(a: Mapping[str, ExtNat]) -> dict:
    return {k: format_extnat(v) for k, v in a.items()}


def assignment_from_json(data) -> Assignment:
    if isinstance(data, str):
        data = json.loads(data)
    return {k: parse_extnat(v) for k, v in data.items()}
