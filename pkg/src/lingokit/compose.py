"""Horizontal and functional composition of lingos."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import Lingo, apply_f, apply_g
from .errors import ArgError, CompositionError, LingoError
from .values import (
    PairParams,
    ParamPair,
    Tagged,
    TaggedParams,
    UnionOf,
    Value,
    format_value,
    subdomain,
    zero_value,
)


def _check_bias(bias) -> tuple[int, ...]:
    bias = tuple(bias)
    if len(bias) < 2:
        raise ArgError(f"a biased die needs at least two faces, got {bias}")
    if any(isinstance(b, bool) or not isinstance(b, int) or b < 1 for b in bias):
        raise ArgError(f"die weights must be positive integers, got {bias}")
    return bias


def throw_biased(draw: int, bias) -> int:
    """Map a uniform draw to a die face in 1..k, face j having weight bias[j-1].

    Cumulative thresholds on ``draw mod sum(bias)`` keep the decoding exact.
    """
    bias = _check_bias(bias)
    r = draw % sum(bias)
    acc = 0
    for face, weight in enumerate(bias, start=1):
        acc += weight
        if r < acc:
            return face
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class HorizontalSpec:
    branches: tuple[tuple[Lingo, Value], ...]
    bias: tuple[int, ...]

    def __post_init__(self):
        branches = tuple((lingo, d0) for lingo, d0 in self.branches)
        object.__setattr__(self, "branches", branches)
        if len(branches) < 2:
            raise CompositionError("horizontal composition needs at least two lingos")
        if len(self.bias) != len(branches):
            raise CompositionError(f"bias has {len(self.bias)} weights for {len(branches)} lingos")
        try:
            object.__setattr__(self, "bias", _check_bias(self.bias))
        except ArgError as exc:
            raise CompositionError(str(exc)) from exc
        d1 = branches[0][0].d1
        for lingo, d0 in branches:
            if lingo.d1 != d1:
                raise CompositionError(f"{lingo.id} does not share input domain {d1!r}")
            if not lingo.d2.contains(d0):
                raise CompositionError(f"default {d0!r} is outside the output domain of {lingo.id}")

    @property
    def lingos(self) -> tuple[Lingo, ...]:
        return tuple(lingo for lingo, _ in self.branches)


def horizontal(spec: HorizontalSpec) -> Lingo:
    """Tagged union of same-input lingos.

    The parameter ``Tagged(i, a_i)`` selects branch i for both directions.  When
    decoding a value outside branch i's output domain, branch i's default
    output value is decoded instead.
    """
    lingos = spec.lingos
    defaults = tuple(d0 for _, d0 in spec.branches)

    def f(d1, a: Tagged):
        return apply_f(lingos[a.index - 1], d1, a.inner)

    def g(d2, a: Tagged):
        lingo = lingos[a.index - 1]
        if not lingo.d2.contains(d2):
            d2 = defaults[a.index - 1]
        return apply_g(lingo, d2, a.inner)

    witness = None
    if all(lingo.f_checkable for lingo in lingos):
        witness = lambda a: lingos[a.index - 1].witness(a.inner)  # noqa: E731

    inner_ids = ",".join(lingo.id for lingo in lingos)
    d0_text = ",".join(format_value(d0) for d0 in defaults)
    bias_text = ",".join(str(b) for b in spec.bias)
    return Lingo(
        id=f"hor({inner_ids};bias={bias_text};d0={d0_text})",
        d1=lingos[0].d1,
        d2=UnionOf(tuple((i, lingo.d2) for i, lingo in enumerate(lingos, start=1))),
        params=TaggedParams(tuple(lingo.params for lingo in lingos)),
        f=f,
        g=g,
        rule="hor",
        parts=lingos,
        options={"bias": spec.bias, "defaults": defaults},
        witness=witness,
    )


def default_output(lingo: Lingo) -> Value:
    """A branch default: the zero output when it decodes, else the encoding of the zero input."""
    a = lingo.params.sample(random.Random(0))
    zero = zero_value(lingo.d2)
    try:
        apply_g(lingo, zero, a)
        return zero
    except LingoError:
        return apply_f(lingo, zero_value(lingo.d1), a)


def uses_default(lingo: Lingo, d2: Value, a: Tagged) -> bool:
    """Whether decoding ``d2`` under ``a`` takes the default-value branch."""
    if lingo.rule != "hor":
        return False
    return not lingo.parts[a.index - 1].d2.contains(d2)


def functional(first: Lingo, second: Lingo) -> Lingo:
    """Chain two lingos: encode with ``first`` then ``second``; decode in reverse."""
    if not subdomain(first.d2, second.d1):
        raise CompositionError(
            f"output domain of {first.id} does not feed the input domain of {second.id}"
        )

    def f(d1, a: ParamPair):
        return apply_f(second, apply_f(first, d1, a.a), a.a2)

    def g(d3, a: ParamPair):
        return apply_g(first, apply_g(second, d3, a.a2), a.a)

    witness = None
    if second.f_checkable:
        witness = lambda a: second.witness(a.a2)  # noqa: E731

    return Lingo(
        id=f"fun({first.id},{second.id})",
        d1=first.d1,
        d2=second.d2,
        params=PairParams(first.params, second.params),
        f=f,
        g=g,
        rule="fun",
        parts=(first, second),
        witness=witness,
    )
