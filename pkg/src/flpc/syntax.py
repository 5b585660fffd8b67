"""Formulas: AST, concrete grammar, printer and fragment classifier.

Counting quantifiers carry a linear set n^{+p}; the witness count must lie in
{n + i*p}.  The infinite cardinal is never a member, so ``exists`` and
``exists[>=n]`` (which do hold when there are infinitely many witnesses) are
compiled into negations of exact-count quantifiers rather than into
``exists[1+1]`` / ``exists[n+1]``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")
KEYWORDS = frozenset({"forall", "exists", "true", "false"})


class FormulaSyntaxError(ValueError):
    """Malformed formula text or ill-formed AST."""


# Signature

@dataclass(frozen=True)
class Signature:
    """Predicate symbols with arities. Equality is implicit."""

    predicates: tuple = ()

    def __post_init__(self):
        preds = tuple((str(n), int(a)) for n, a in self.predicates)
        seen = {}
        for name, arity in preds:
            if not _IDENT.match(name) or name in KEYWORDS:
                raise ValueError(f"bad predicate name {name!r}")
            if arity < 0:
                raise ValueError(f"negative arity for {name}")
            if name in seen and seen[name] != arity:
                raise ValueError(f"predicate {name} declared with arities {seen[name]} and {arity}")
            seen[name] = arity
        object.__setattr__(self, "predicates", tuple(sorted(seen.items())))

    @classmethod
    def of(cls, mapping: dict | Iterable = ()) -> "Signature":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        return cls(tuple(items))

    def arity(self, name: str) -> int:
        for n, a in self.predicates:
            if n == name:
                return a
        raise KeyError(name)

    def as_dict(self) -> dict:
        return dict(self.predicates)

    def __contains__(self, name) -> bool:
        return any(n == name for n, _ in self.predicates)

    def __iter__(self):
        return iter(self.predicates)

    def __len__(self) -> int:
        return len(self.predicates)

    @property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.predicates)

    def with_arity(self, arity: int) -> tuple:
        return tuple(n for n, a in self.predicates if a == arity)

    @property
    def max_arity(self) -> int:
        return max((a for _, a in self.predicates), default=0)

    def union(self, other: "Signature") -> "Signature":
        return Signature(self.predicates + tuple(other.predicates))

    def restrict(self, names: Iterable[str]) -> "Signature":
        keep = set(names)
        return Signature(tuple(p for p in self.predicates if p[0] in keep))

    def without(self, names: Iterable[str]) -> "Signature":
        drop = set(names)
        return Signature(tuple(p for p in self.predicates if p[0] not in drop))


def parse_signature(text: str) -> Signature:
    """One ``name/arity`` per line; ``#`` starts a comment; commas also separate."""
    preds = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0]
        for item in line.split(","):
            item = item.strip()
            if not item:
                continue
            name, sep, arity = item.partition("/")
            if not sep:
                raise FormulaSyntaxError(f"expected name/arity, got {item!r}")
            preds.append((name.strip(), int(arity)))
    return Signature(tuple(preds))


def format_signature(sig: Signature) -> str:
    return "".join(f"{n}/{a}\n" for n, a in sig.predicates)


# AST

@dataclass(frozen=True)
class CountSpec:
    """The linear set n^{+p} = {n + i*p : i >= 0}."""

    n: int
    p: int

    def __post_init__(self):
        if self.n < 0 or self.p < 0:
            raise ValueError("count spec needs n, p >= 0")

    def contains(self, k) -> bool:
        from .diophantine.arith import linear_set_member
        return linear_set_member(k, self.n, self.p)

    def __str__(self) -> str:
        return f"{self.n}+{self.p}"


NONE = CountSpec(0, 0)  # "no witness": the universal quantifier's count


class Formula:
    """Base class of formula nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    pred: str
    args: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Equality(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Or(Formula):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    count: CountSpec
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


TRUE = Top()
FALSE = Bottom()


# smart constructors used by generators

def conj(*args: Formula) -> Formula:
    args = tuple(a for a in args if not isinstance(a, Top))
    if any(isinstance(a, Bottom) for a in args):
        return FALSE
    if not args:
        return TRUE
    return args[0] if len(args) == 1 else And(args)


def disj(*args: Formula) -> Formula:
    args = tuple(a for a in args if not isinstance(a, Bottom))
    if any(isinstance(a, Top) for a in args):
        return TRUE
    if not args:
        return FALSE
    return args[0] if len(args) == 1 else Or(args)


def neg(f: Formula) -> Formula:
    if isinstance(f, Top):
        return FALSE
    if isinstance(f, Bottom):
        return TRUE
    return Not(f)


def exists(var: str, body: Formula) -> Formula:
    """Plain existential: at least one witness (infinitely many included)."""
    return Not(Exists(NONE, var, body))


def exists_count(n: int, p: int, var: str, body: Formula) -> Exists:
    return Exists(CountSpec(n, p), var, body)


def exists_exactly(n: int, var: str, body: Formula) -> Exists:
    return Exists(CountSpec(n, 0), var, body)


def exists_at_most(n: int, var: str, body: Formula) -> Formula:
    parts = tuple(Exists(CountSpec(k, 0), var, body) for k in range(n + 1))
    return parts[0] if len(parts) == 1 else Or(parts)


def exists_at_least(n: int, var: str, body: Formula) -> Formula:
    if n == 0:
        return TRUE
    return Not(exists_at_most(n - 1, var, body))


def forall(var: str, body: Formula) -> Forall:
    return Forall(var, body)


def forall_many(vars_: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(vars_)):
        body = Forall(v, body)
    return body


def children(f: Formula) -> tuple:
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, (Implies, Iff)):
        return (f.left, f.right)
    if isinstance(f, (Exists, Forall)):
        return (f.body,)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def formula_size(f: Formula) -> int:
    """Number of symbols: nodes plus atom arguments."""
    total = 0
    for g in subformulas(f):
        total += 1
        if isinstance(g, Atom):
            total += len(g.args)
        elif isinstance(g, Equality):
            total += 2
    return total


def free_variables(f: Formula) -> set:
    if isinstance(f, Atom):
        return set(f.args)
    if isinstance(f, Equality):
        return {f.left, f.right}
    if isinstance(f, (Exists, Forall)):
        return free_variables(f.body) - {f.var}
    out: set = set()
    for c in children(f):
        out |= free_variables(c)
    return out


def predicates_of(f: Formula) -> Signature:
    """Signature read off explicit atoms (bare atoms count as nullary)."""
    found = {}
    for g in subformulas(f):
        if isinstance(g, Atom):
            if found.setdefault(g.pred, len(g.args)) != len(g.args):
                raise FormulaSyntaxError(f"predicate {g.pred} used with different arities")
    return Signature(tuple(found.items()))


# Parsing

_TOKEN = re.compile(r"""
    \s*(?:
      (?P<num>\d+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    | (?P<op><->|->|>=|<=|[!&|()\[\],=+~])
    )""", re.VERBOSE)


def _tokenize(text: str) -> list:
    text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, sig: Optional[Signature]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.sig = sig.as_dict() if sig is not None else None
        self.inferred: dict[str, int] = {}
        self.scope: list[str] = []

    def peek(self, k: int = 0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        tok = self.next()
        if tok[1] != value or tok[0] != "op":
            raise FormulaSyntaxError(f"expected {value!r} at offset {tok[2]}, got {tok[1]!r}")
        return tok

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok[1] == value and tok[0] in ("op", "ident")

    def fail(self, msg: str):
        raise FormulaSyntaxError(f"{msg} at offset {self.peek()[2]}")

    def parse(self) -> Formula:
        f = self.iff()
        if self.peek()[0] != "eof":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return f

    def iff(self) -> Formula:
        left = self.imp()
        while self.at("<->"):
            self.next()
            left = Iff(left, self.imp())
        return left

    def imp(self) -> Formula:
        left = self.disj()
        if self.at("->"):
            self.next()
            return Implies(left, self.imp())
        return left

    def disj(self) -> Formula:
        args = [self.conj()]
        while self.at("|"):
            self.next()
            args.append(self.conj())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conj(self) -> Formula:
        args = [self.unary()]
        while self.at("&"):
            self.next()
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self) -> Formula:
        tok = self.peek()
        if tok[1] in ("!", "~") and tok[0] == "op":
            self.next()
            return Not(self.unary())
        if tok[0] == "ident" and tok[1] in ("forall", "exists"):
            return self.quantifier()
        return self.primary()

    def number(self) -> int:
        tok = self.next()
        if tok[0] != "num":
            raise FormulaSyntaxError(f"expected a number at offset {tok[2]}")
        return int(tok[1])

    def quantifier(self) -> Formula:
        kind = self.next()[1]
        spec = None
        if kind == "exists" and self.at("["):
            self.next()
            if self.at("="):
                self.next()
                spec = ("eq", self.number())
            elif self.at(">="):
                self.next()
                spec = ("ge", self.number())
            elif self.at("<="):
                self.next()
                spec = ("le", self.number())
            else:
                n = self.number()
                self.expect("+")
                spec = ("np", n, self.number())
            self.expect("]")
        if self.peek()[0] == "ident" and self.peek()[1] not in KEYWORDS:
            var = self.next()[1]
        elif self.at("("):
            var = f"x{len(self.scope) + 1}"  # variable-free sugar
            while var in self.scope:
                var += "'"
        else:
            self.fail("expected a variable or '('")
        if var in self.scope:
            self.fail(f"variable {var} is already bound")
        self.scope.append(var)
        try:
            body = self.unary()
        finally:
            self.scope.pop()
        if kind == "forall":
            return Forall(var, body)
        if spec is None:
            return exists(var, body)
        if spec[0] == "eq":
            return exists_exactly(spec[1], var, body)
        if spec[0] == "ge":
            return exists_at_least(spec[1], var, body)
        if spec[0] == "le":
            return exists_at_most(spec[1], var, body)
        return exists_count(spec[1], spec[2], var, body)

    def declare(self, name: str, arity: int):
        if self.sig is not None:
            if name not in self.sig:
                self.fail(f"unknown predicate {name}")
            if self.sig[name] != arity:
                self.fail(f"predicate {name} has arity {self.sig[name]}, used with {arity}")
        elif self.inferred.setdefault(name, arity) != arity:
            self.fail(f"predicate {name} used with different arities")

    def primary(self) -> Formula:
        tok = self.next()
        if tok[0] == "op" and tok[1] == "(":
            f = self.iff()
            self.expect(")")
            return f
        if tok[0] != "ident":
            raise FormulaSyntaxError(f"unexpected {tok[1]!r} at offset {tok[2]}")
        name = tok[1]
        if name == "true":
            return TRUE
        if name == "false":
            return FALSE
        if self.at("="):
            self.next()
            right = self.next()
            if right[0] != "ident" or right[1] in KEYWORDS:
                raise FormulaSyntaxError(f"expected a variable at offset {right[2]}")
            return Equality(name, right[1])
        if self.at("("):
            self.next()
            args = []
            if not self.at(")"):
                while True:
                    a = self.next()
                    if a[0] != "ident" or a[1] in KEYWORDS:
                        raise FormulaSyntaxError(f"expected a variable at offset {a[2]}")
                    args.append(a[1])
                    if self.at(","):
                        self.next()
                        continue
                    break
            self.expect(")")
            self.declare(name, len(args))
            return Atom(name, tuple(args))
        if name in self.scope:
            raise FormulaSyntaxError(f"variable {name} used as a formula at offset {tok[2]}")
        # bare atom: takes the current suffix of bound variables
        arity = 0
        if self.sig is not None:
            if name not in self.sig:
                raise FormulaSyntaxError(f"unknown predicate {name} at offset {tok[2]}")
            arity = self.sig[name]
        if arity > len(self.scope):
            raise FormulaSyntaxError(f"bare {name}/{arity} needs {arity} bound variables")
        self.declare(name, arity)
        return Atom(name, tuple(self.scope[len(self.scope) - arity:]))


def parse_formula(text: str, sig: Optional[Signature] = None) -> Formula:
    """Parse formula text.  Without ``sig`` the signature is inferred."""
    return _Parser(text, sig).parse()


def parse_with_signature(text: str, sig: Optional[Signature] = None) -> tuple:
    p = _Parser(text, sig)
    f = p.parse()
    return f, (sig if sig is not None else Signature(tuple(p.inferred.items())))


# Printing

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}


def print_formula(f: Formula) -> str:
    return _print(f)


def _wrap(f: Formula, parent_prec: int, allow_equal: bool = False) -> str:
    prec = _PREC.get(type(f))
    text = _print(f)
    if prec is None:
        return text
    if prec < parent_prec or (prec == parent_prec and not allow_equal):
        return f"({text})"
    return text


def _print(f: Formula) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Atom):
        return f.pred if not f.args else f"{f.pred}({','.join(f.args)})"
    if isinstance(f, Equality):
        return f"{f.left} = {f.right}"
    if isinstance(f, Not):
        inner = f.arg
        if isinstance(inner, (Atom, Equality, Top, Bottom, Not, Exists, Forall)):
            return "!" + _print(inner)
        return f"!({_print(inner)})"
    if isinstance(f, And):
        return " & ".join(_wrap(a, 4) for a in f.args)
    if isinstance(f, Or):
        return " | ".join(_wrap(a, 3) for a in f.args)
    if isinstance(f, Implies):
        return f"{_wrap(f.left, 2)} -> {_wrap(f.right, 2, allow_equal=True)}"
    if isinstance(f, Iff):
        return f"{_wrap(f.left, 1, allow_equal=True)} <-> {_wrap(f.right, 1)}"
    if isinstance(f, Exists):
        return f"exists[{f.count.n}+{f.count.p}] {f.var} ({_print(f.body)})"
    if isinstance(f, Forall):
        return f"forall {f.var} ({_print(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


# Classification

@dataclass(frozen=True)
class FragmentReport:
    variable_width: int
    is_fluted: bool
    is_fluted_rev: bool
    uses_counting: bool
    uses_periodic: bool
    offending_atoms: tuple = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "variable_width": self.variable_width,
            "is_fluted": self.is_fluted,
            "is_fluted_rev": self.is_fluted_rev,
            "uses_counting": self.uses_counting,
            "uses_periodic": self.uses_periodic,
            "offending_atoms": [{"atom": a, "reason": r} for a, r in self.offending_atoms],
        }


def atom_positions(args: tuple, scope: list) -> Optional[list]:
    """1-based depth indices of the arguments, or None if some are free."""
    index = {v: i + 1 for i, v in enumerate(scope)}
    if any(a not in index for a in args):
        return None
    return [index[a] for a in args]


def suffix_kind(positions: list, depth: int, symmetric: bool = False) -> str:
    """'fluted', 'reversed' or 'other' for argument positions at a depth."""
    k = len(positions)
    suffix = list(range(depth - k + 1, depth + 1))
    if positions == suffix or (symmetric and positions == suffix[::-1]):
        return "fluted"
    if positions == suffix[::-1]:
        return "reversed"
    return "other"


def classify_fragment(f: Formula) -> FragmentReport:
    width = 0
    fluted = True
    fluted_rev = True
    counting = False
    periodic = False
    offending = []

    def walk(g: Formula, scope: list):
        nonlocal width, fluted, fluted_rev, counting, periodic
        if isinstance(g, (Atom, Equality)):
            args = g.args if isinstance(g, Atom) else (g.left, g.right)
            pos = atom_positions(args, scope)
            if pos is None:
                kind = "free"
            else:
                kind = suffix_kind(pos, len(scope), symmetric=isinstance(g, Equality))
            if kind != "fluted":
                fluted = False
                reason = {"reversed": "reversed suffix of the bound variables",
                          "free": "mentions a free variable"}.get(kind, "not a suffix of the bound variables")
                offending.append((print_formula(g), reason))
                if kind != "reversed":
                    fluted_rev = False
            return
        if isinstance(g, (Exists, Forall)):
            if g.var in scope:
                raise FormulaSyntaxError(f"variable {g.var} quantified twice on one branch")
            if isinstance(g, Exists):
                if (g.count.n, g.count.p) != (0, 0):
                    counting = True
                if g.count.p >= 1:
                    periodic = True
            width = max(width, len(scope) + 1)
            walk(g.body, scope + [g.var])
            return
        for c in children(g):
            walk(c, scope)

    walk(f, [])
    return FragmentReport(width, fluted, fluted_rev, counting, periodic, tuple(offending))
