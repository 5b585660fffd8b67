"""Extended natural numbers: finite ints plus a single infinite value.

Finite values are plain ``int``. The infinite value is the singleton ``INF``,
which cooperates with Python's numeric protocol, so ``sum``, ``max``, ``<``
and ``*`` behave as in the extended naturals (``0 * INF == 0``).
"""
from __future__ import annotations

from typing import Union


class _Aleph0:
    """The first infinite cardinal. Use the module-level ``INF``."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (_Aleph0, ())

    def __hash__(self) -> int:
        return hash("extnat-aleph0")

    def __eq__(self, other) -> bool:
        return other is self

    def __ne__(self, other) -> bool:
        return other is not self

    def __lt__(self, other) -> bool:
        _check(other)
        return False

    def __le__(self, other) -> bool:
        _check(other)
        return other is self

    def __gt__(self, other) -> bool:
        _check(other)
        return other is not self

    def __ge__(self, other) -> bool:
        _check(other)
        return True

    def __add__(self, other):
        _check(other)
        return self

    __radd__ = __add__

    def __mul__(self, other):
        _check(other)
        return 0 if other == 0 else self

    __rmul__ = __mul__


def _check(value) -> None:
    if value is INF:
        return
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise TypeError(f"not an extended natural: {value!r}")


INF = _Aleph0()
ExtNat = Union[int, _Aleph0]


def is_inf(value: ExtNat) -> bool:
    return value is INF


def check_extnat(value) -> ExtNat:
    """Return ``value`` unchanged if it is a valid extended natural."""
    _check(value)
    return value


def ext_add(a: ExtNat, b: ExtNat) -> ExtNat:
    _check(a)
    _check(b)
    return a + b


def ext_mul(a: ExtNat, b: ExtNat) -> ExtNat:
    _check(a)
    _check(b)
    if a == 0 or b == 0:
        return 0
    return a * b


def ext_compare(a: ExtNat, b: ExtNat) -> int:
    """Three-way comparison; INF is the maximum and equals only itself."""
    _check(a)
    _check(b)
    if a == b:
        return 0
    return -1 if a < b else 1


def ext_arith(op: str, a: ExtNat, b: ExtNat):
    if op == "+":
        return ext_add(a, b)
    if op in ("*", "·"):
        return ext_mul(a, b)
    if op == "compare":
        return ext_compare(a, b)
    raise ValueError(f"unknown operation {op!r}")


def linear_set_member(k: ExtNat, n: int, p: int) -> bool:
    """Is ``k`` in the linear set {n + i*p : i in N}?  INF never is."""
    _check(k)
    if n < 0 or p < 0:
        raise ValueError("base and period must be nonnegative")
    if k is INF or k < n:
        return False
    if p == 0:
        return k == n
    return (k - n) % p == 0


def parse_extnat(value) -> ExtNat:
    """Decode the JSON spelling: ints stay ints, ``"inf"`` is INF."""
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "aleph0", "ℵ₀"):
            return INF
        value = int(value)
    _check(value)
    return value


def format_extnat(value: ExtNat):
    return "inf" if value is INF else value
