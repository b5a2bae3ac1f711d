"""The executable lingo: an invertible, parameter-indexed payload transformation.

A lingo bundles an encoder ``f`` and decoder ``g`` over explicit domains such
that ``g(f(d1, a), a) == d1`` for every input and parameter.  Everything in
this module is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from .errors import ArgError, DomainError
from .values import (
    BitVec,
    BitVecs,
    Domain,
    NatPairs,
    NatVal,
    Nats,
    PairParams,
    PairVal,
    ParamPair,
    ParamDomain,
    Parameter,
    ScalarParams,
    Value,
    domain_contains,
    nat_pair,
)

Encoder = Callable[[Value, Parameter], Value]


@dataclass(frozen=True, eq=False)
class Lingo:
    """A runnable lingo.

    ``rule`` names the parameter-derivation rule used by the param engine and
    ``parts`` holds the sub-lingos of composite rules.  ``witness``, when set,
    maps a parameter to some output value that no input encodes to under that
    parameter; its presence is what makes the lingo f-checkable.
    """

    id: str
    d1: Domain
    d2: Domain
    params: ParamDomain
    f: Encoder
    g: Encoder
    rule: str
    parts: tuple["Lingo", ...] = ()
    options: Mapping[str, Any] = field(default_factory=dict)
    witness: Callable[[Parameter], Value] | None = None
    cheap_reject: Callable[[Value, Parameter], bool] | None = None
    ingress_arity: int = 1
    egress_arity: int = 1

    @property
    def f_checkable(self) -> bool:
        return self.witness is not None

    def __repr__(self) -> str:
        return f"Lingo({self.id})"


def check_param(lingo: Lingo, a: Parameter) -> None:
    pd = lingo.params
    if isinstance(pd, PairParams) and pd.distinct and isinstance(a, ParamPair) and a.a == a.a2:
        raise ArgError(f"{lingo.id}: parameter halves must differ, got {a!r}")
    if not pd.contains(a):
        raise DomainError(f"{lingo.id}: malformed parameter {a!r}")


def apply_f(lingo: Lingo, d1: Value, a: Parameter) -> Value:
    if not lingo.d1.contains(d1):
        raise DomainError(f"{lingo.id}: {d1!r} is not in the input domain")
    check_param(lingo, a)
    return lingo.f(d1, a)


def apply_g(lingo: Lingo, d2: Value, a: Parameter) -> Value:
    if not lingo.d2.contains(d2):
        raise DomainError(f"{lingo.id}: {d2!r} is not in the output domain")
    check_param(lingo, a)
    return lingo.g(d2, a)


def check_compliance(lingo: Lingo, d2: Value, a: Parameter) -> bool:
    """True iff ``d2`` is a genuine encoding under ``a``, i.e. f(g(d2, a), a) == d2."""
    if not lingo.d2.contains(d2):
        raise DomainError(f"{lingo.id}: {d2!r} is not in the output domain")
    check_param(lingo, a)
    try:
        return lingo.f(lingo.g(d2, a), a) == d2
    except DomainError:
        # g undefined here, so nothing encodes to d2
        return False


# -- base lingos ------------------------------------------------------------


def xor_lingo(n: int) -> Lingo:
    """Bitwise xor over n-bit vectors; symmetric, hence not f-checkable."""
    if not isinstance(n, int) or n < 1:
        raise ArgError(f"xor width must be a positive integer, got {n!r}")

    def xor(d: BitVec, a) -> BitVec:
        return BitVec(n, d.v ^ a.v)

    dom = BitVecs(n)
    return Lingo(
        id=f"xor:{n}",
        d1=dom,
        d2=dom,
        params=ScalarParams(bits=n),
        f=xor,
        g=xor,
        rule="xor",
        options={"width": n},
    )


def xor_bseq_lingo() -> Lingo:
    """Xor of binary expansions of unbounded naturals."""

    def xor(d: NatVal, a) -> NatVal:
        return NatVal(d.v ^ a.v)

    return Lingo(
        id="xorbseq",
        d1=Nats(),
        d2=Nats(),
        params=ScalarParams(),
        f=xor,
        g=xor,
        rule="xorbseq",
    )


def _dnc_encode(n: int, a: int) -> tuple[int, int]:
    m = a + 2
    return divmod(n + m, m)


def _dnc_decode(x: int, y: int, a: int) -> int:
    m = a + 2
    n = x * m + y - m
    if n < 0:
        raise DomainError(f"divide-and-check pair ({x}, {y}) decodes below zero for a={a}")
    return n


def dnc_lingo() -> Lingo:
    """Divide and check: n -> (quot, rem) of n + a + 2 by a + 2."""

    def f(d: NatVal, a) -> PairVal:
        return nat_pair(*_dnc_encode(d.v, a.v))

    def g(p: PairVal, a) -> NatVal:
        return NatVal(_dnc_decode(p.first.v, p.second.v, a.v))

    return Lingo(
        id="dnc",
        d1=Nats(),
        d2=NatPairs(),
        params=ScalarParams(),
        f=f,
        g=g,
        rule="dnc",
        witness=lambda a: nat_pair(1, a.v + 2),
        cheap_reject=lambda p, a: p.second.v >= a.v + 2,
    )


def reverse_dnc_lingo() -> Lingo:
    """Divide and check with the output pair swapped: n -> (rem, quot)."""

    def f(d: NatVal, a) -> PairVal:
        x, y = _dnc_encode(d.v, a.v)
        return nat_pair(y, x)

    def g(p: PairVal, a) -> NatVal:
        return NatVal(_dnc_decode(p.second.v, p.first.v, a.v))

    return Lingo(
        id="rdnc",
        d1=Nats(),
        d2=NatPairs(),
        params=ScalarParams(),
        f=f,
        g=g,
        rule="rdnc",
        witness=lambda a: nat_pair(a.v + 2, 1),
        cheap_reject=lambda p, a: p.first.v >= a.v + 2,
    )


__all__ = [
    "Lingo",
    "apply_f",
    "apply_g",
    "check_compliance",
    "check_param",
    "domain_contains",
    "dnc_lingo",
    "reverse_dnc_lingo",
    "xor_bseq_lingo",
    "xor_lingo",
]
