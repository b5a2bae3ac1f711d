"""Payload values, their domains, and lingo parameters.

Everything here is an immutable value. Values form a closed tagged union so
that domain membership is decidable and the JSON wire form is canonical.
"""

from __future__ import annotations

import operator
import random
from dataclasses import dataclass
from typing import Any, Union

from .errors import DomainError

JSON_SAFE_MAX = 1 << 53


def _nat(x: Any, what: str) -> int:
    if type(x) is int and x >= 0:
        return x
    if isinstance(x, bool) or not isinstance(x, int) or x < 0:
        raise DomainError(f"{what} must be a natural number, got {x!r}")
    return x


# -- values -----------------------------------------------------------------


@dataclass(frozen=True)
class NatVal:
    v: int

    def __post_init__(self):
        _nat(self.v, "NatVal")


@dataclass(frozen=True)
class BitVec:
    width: int
    v: int

    def __post_init__(self):
        if _nat(self.width, "BitVec width") == 0:
            raise DomainError("BitVec width must be positive")
        if _nat(self.v, "BitVec value") >> self.width:
            raise DomainError(f"BitVec value {self.v} does not fit in {self.width} bits")


@dataclass(frozen=True)
class PairVal:
    first: "Value"
    second: "Value"

    def __post_init__(self):
        for part in (self.first, self.second):
            if not isinstance(part, VALUE_TYPES):
                raise DomainError(f"pair component is not a Value: {part!r}")


@dataclass(frozen=True)
class BitStr:
    """A bit string of fixed length; bit 1 is the most significant bit of ``bits``."""

    length: int
    bits: int

    def __post_init__(self):
        if _nat(self.length, "BitStr length") == 0:
            raise DomainError("BitStr length must be positive")
        if _nat(self.bits, "BitStr bits") >> self.length:
            raise DomainError(f"BitStr bits {self.bits} do not fit in {self.length} bits")


Value = Union[NatVal, BitVec, PairVal, BitStr]
VALUE_TYPES = (NatVal, BitVec, PairVal, BitStr)


def evolve(obj, **changes):
    """Copy of a frozen dataclass with ``changes`` applied, skipping re-validation."""
    new = object.__new__(type(obj))
    new.__dict__.update(obj.__dict__, **changes)
    return new


def nat_pair(x: int, y: int) -> PairVal:
    return PairVal(NatVal(x), NatVal(y))


# -- domains ----------------------------------------------------------------


@dataclass(frozen=True)
class Nats:
    """Naturals; ``bits`` bounds them below 2**bits when set."""

    bits: int | None = None

    def contains(self, v: Any) -> bool:
        return isinstance(v, NatVal) and (self.bits is None or v.v >> self.bits == 0)


@dataclass(frozen=True)
class BitVecs:
    width: int

    def contains(self, v: Any) -> bool:
        return isinstance(v, BitVec) and v.width == self.width


@dataclass(frozen=True)
class NatPairs:
    def contains(self, v: Any) -> bool:
        return isinstance(v, PairVal) and isinstance(v.first, NatVal) and isinstance(v.second, NatVal)


@dataclass(frozen=True)
class BitStrs:
    length: int

    def contains(self, v: Any) -> bool:
        return isinstance(v, BitStr) and v.length == self.length


@dataclass(frozen=True)
class ProductOf:
    first: "Domain"
    second: "Domain"

    def contains(self, v: Any) -> bool:
        return isinstance(v, PairVal) and self.first.contains(v.first) and self.second.contains(v.second)


@dataclass(frozen=True)
class UnionOf:
    branches: tuple[tuple[int, "Domain"], ...]

    def __post_init__(self):
        indices = [i for i, _ in self.branches]
        if indices != list(range(1, len(indices) + 1)):
            raise DomainError(f"union branch indices must be 1..k in order, got {indices}")

    def contains(self, v: Any) -> bool:
        return any(dom.contains(v) for _, dom in self.branches)

    def branch(self, index: int) -> "Domain":
        return self.branches[index - 1][1]


Domain = Union[Nats, BitVecs, NatPairs, BitStrs, ProductOf, UnionOf]


def domain_contains(dom: Domain, v: Any) -> bool:
    """Total membership test; for unions, true iff some branch contains ``v``."""
    return dom.contains(v)


def subdomain(inner: Domain, outer: Domain) -> bool:
    """Conservative syntactic check that every member of ``inner`` lies in ``outer``."""
    if inner == outer:
        return True
    match inner, outer:
        case Nats(bits=b), Nats(bits=c):
            return c is None or (b is not None and b <= c)
        case NatPairs(), ProductOf(first=a, second=b):
            return subdomain(Nats(), a) and subdomain(Nats(), b)
        case ProductOf(first=a, second=b), NatPairs():
            return subdomain(a, Nats()) and subdomain(b, Nats())
        case ProductOf(first=a, second=b), ProductOf(first=c, second=d):
            return subdomain(a, c) and subdomain(b, d)
        case UnionOf(branches=bs), _:
            return all(subdomain(d, outer) for _, d in bs)
        case _, UnionOf(branches=bs):
            return any(subdomain(inner, d) for _, d in bs)
    return False


def zero_value(dom: Domain) -> Value:
    match dom:
        case Nats():
            return NatVal(0)
        case BitVecs(width=w):
            return BitVec(w, 0)
        case NatPairs():
            return nat_pair(0, 0)
        case BitStrs(length=n):
            return BitStr(n, 0)
        case ProductOf(first=a, second=b):
            return PairVal(zero_value(a), zero_value(b))
        case UnionOf(branches=bs):
            return zero_value(bs[0][1])
    raise DomainError(f"unknown domain {dom!r}")


def two_values(dom: Domain) -> tuple[Value, Value]:
    """Two distinct members of ``dom``; every supported domain has at least two."""
    zero = zero_value(dom)
    match dom:
        case Nats():
            return zero, NatVal(1)
        case BitVecs(width=w):
            return zero, BitVec(w, 1)
        case NatPairs():
            return zero, nat_pair(0, 1)
        case BitStrs(length=n):
            return zero, BitStr(n, 1)
        case ProductOf(first=a, second=b):
            return zero, PairVal(zero_value(a), two_values(b)[1])
        case UnionOf(branches=bs):
            return two_values(bs[0][1])
    raise DomainError(f"unknown domain {dom!r}")


# Unbounded naturals are drawn from [0, 2**32) by the samplers.
SAMPLE_BITS = 32


def sample_value(dom: Domain, rng: random.Random) -> Value:
    match dom:
        case Nats(bits=b):
            return NatVal(rng.getrandbits(b if b is not None else SAMPLE_BITS))
        case BitVecs(width=w):
            return BitVec(w, rng.getrandbits(w))
        case NatPairs():
            return nat_pair(rng.getrandbits(SAMPLE_BITS), rng.getrandbits(SAMPLE_BITS))
        case BitStrs(length=n):
            return BitStr(n, rng.getrandbits(n))
        case ProductOf(first=a, second=b):
            return PairVal(sample_value(a, rng), sample_value(b, rng))
        case UnionOf(branches=bs):
            return sample_value(rng.choice(bs)[1], rng)
    raise DomainError(f"unknown domain {dom!r}")


# -- involutions and parameters ---------------------------------------------


@dataclass(frozen=True)
class Involution:
    """A self-inverse permutation of positions 1..size.

    Applied to a bit string b1..bn it yields b_{mapping(1)}..b_{mapping(n)}.
    """

    size: int
    mapping: tuple[int, ...]

    def __post_init__(self):
        self._validate()
        self._prepare()

    def _validate(self) -> None:
        if self.size < 1 or len(self.mapping) != self.size:
            raise DomainError("involution mapping must list one image per position")
        if sorted(self.mapping) != list(range(1, self.size + 1)):
            raise DomainError("involution mapping is not a permutation")
        if any(self.mapping[self.mapping[i] - 1] != i + 1 for i in range(self.size)):
            raise DomainError("mapping is not its own inverse")

    def _prepare(self) -> None:
        # permuting the zero-padded binary string is much cheaper than bit twiddling
        pick = operator.itemgetter(*(j - 1 for j in self.mapping)) if self.size > 1 else (lambda t: t)
        object.__setattr__(self, "_pick", pick)
        object.__setattr__(self, "_fmt", f"0{self.size}b")

    @classmethod
    def from_pairs(cls, size: int, pairs) -> "Involution":
        """Product of disjoint transpositions; built directly since it is valid by construction."""
        mapping = list(range(1, size + 1))
        for p, q in pairs:
            if p == q or mapping[p - 1] != p or mapping[q - 1] != q:
                raise DomainError(f"transpositions must be disjoint, got ({p}, {q})")
            mapping[p - 1], mapping[q - 1] = q, p
        inv = object.__new__(cls)
        object.__setattr__(inv, "size", size)
        object.__setattr__(inv, "mapping", tuple(mapping))
        inv._prepare()
        return inv

    @classmethod
    def from_perm(cls, perm: list[int]) -> "Involution":
        """Trusted constructor from a 0-based self-inverse index list."""
        inv = object.__new__(cls)
        object.__setattr__(inv, "size", len(perm))
        object.__setattr__(inv, "mapping", tuple(map((1).__add__, perm)))
        object.__setattr__(inv, "_pick", operator.itemgetter(*perm))
        object.__setattr__(inv, "_fmt", f"0{len(perm)}b")
        return inv

    def apply(self, bits: int) -> int:
        return int("".join(self._pick(format(bits, self._fmt))), 2)

    def compose(self, other: "Involution") -> tuple[int, ...]:
        """Mapping of ``self`` after ``other``; the identity when other is self."""
        return tuple(other.mapping[self.mapping[i] - 1] for i in range(self.size))


def random_involution(size: int, rng: random.Random) -> Involution:
    order = list(range(1, size + 1))
    rng.shuffle(order)
    return Involution.from_pairs(size, zip(order[0::2], order[1::2]))


@dataclass(frozen=True)
class Scalar:
    v: int

    def __post_init__(self):
        _nat(self.v, "Scalar")


@dataclass(frozen=True)
class ParamPair:
    a: "Parameter"
    a2: "Parameter"


@dataclass(frozen=True)
class Tagged:
    index: int
    inner: "Parameter"

    def __post_init__(self):
        if _nat(self.index, "Tagged index") == 0:
            raise DomainError("Tagged index is 1-based")


@dataclass(frozen=True)
class AuthTriple:
    a0: "Parameter"
    sigma: Involution
    d: int

    def __post_init__(self):
        _nat(self.d, "AuthTriple code")


Parameter = Union[Scalar, ParamPair, Tagged, AuthTriple]


# -- parameter domains ------------------------------------------------------


@dataclass(frozen=True)
class ScalarParams:
    bits: int | None = None

    def contains(self, a: Any) -> bool:
        return isinstance(a, Scalar) and (self.bits is None or a.v >> self.bits == 0)

    def sample(self, rng: random.Random) -> Scalar:
        return Scalar(rng.getrandbits(self.bits if self.bits is not None else SAMPLE_BITS))


@dataclass(frozen=True)
class PairParams:
    """Pairs of parameters; ``distinct`` excludes the diagonal (the A (x) A set)."""

    first: "ParamDomain"
    second: "ParamDomain"
    distinct: bool = False

    def contains(self, a: Any) -> bool:
        return (
            isinstance(a, ParamPair)
            and self.first.contains(a.a)
            and self.second.contains(a.a2)
            and not (self.distinct and a.a == a.a2)
        )

    def sample(self, rng: random.Random) -> ParamPair:
        while True:
            p = ParamPair(self.first.sample(rng), self.second.sample(rng))
            if not (self.distinct and p.a == p.a2):
                return p


@dataclass(frozen=True)
class TaggedParams:
    branches: tuple["ParamDomain", ...]

    def contains(self, a: Any) -> bool:
        return (
            isinstance(a, Tagged)
            and a.index <= len(self.branches)
            and self.branches[a.index - 1].contains(a.inner)
        )

    def sample(self, rng: random.Random) -> Tagged:
        i = rng.randrange(len(self.branches))
        return Tagged(i + 1, self.branches[i].sample(rng))


@dataclass(frozen=True)
class AuthParams:
    base: "ParamDomain"
    size: int
    j: int

    def contains(self, a: Any) -> bool:
        return (
            isinstance(a, AuthTriple)
            and self.base.contains(a.a0)
            and a.sigma.size == self.size
            and a.d >> self.j == 0
        )

    def sample(self, rng: random.Random) -> AuthTriple:
        return AuthTriple(self.base.sample(rng), random_involution(self.size, rng), rng.getrandbits(self.j))


ParamDomain = Union[ScalarParams, PairParams, TaggedParams, AuthParams]


def sample_param(pd: ParamDomain, rng: random.Random) -> Parameter:
    return pd.sample(rng)


# -- bit views --------------------------------------------------------------


def bit_width(dom: Domain) -> int | None:
    """Number of bits needed to lay a member of ``dom`` out as a bit string."""
    match dom:
        case Nats(bits=b):
            return b
        case BitVecs(width=w):
            return w
        case BitStrs(length=n):
            return n
        case ProductOf(first=a, second=b):
            wa, wb = bit_width(a), bit_width(b)
            return None if wa is None or wb is None else wa + wb
    return None


def to_bits(v: Value, dom: Domain) -> int:
    """Concatenate ``v`` into one natural, first component in the high bits."""
    match v, dom:
        case NatVal(v=x), Nats():
            return x
        case BitVec(v=x), BitVecs():
            return x
        case BitStr(bits=x), BitStrs():
            return x
        case PairVal(first=a, second=b), ProductOf(first=da, second=db):
            return (to_bits(a, da) << bit_width(db)) | to_bits(b, db)
    raise DomainError(f"{v!r} has no bit layout in {dom!r}")


def from_bits(x: int, dom: Domain) -> Value:
    match dom:
        case Nats():
            return NatVal(x)
        case BitVecs(width=w):
            return BitVec(w, x)
        case BitStrs(length=n):
            return BitStr(n, x)
        case ProductOf(first=da, second=db):
            wb = bit_width(db)
            return PairVal(from_bits(x >> wb, da), from_bits(x & ((1 << wb) - 1), db))
    raise DomainError(f"{dom!r} has no bit layout")


# -- JSON wire form ---------------------------------------------------------


def _nat_out(n: int) -> int | str:
    return n if n < JSON_SAFE_MAX else str(n)


def _nat_in(x: Any) -> int:
    if isinstance(x, str) and x.isdigit():
        return int(x)
    return _nat(x, "JSON natural")


def value_to_json(v: Value) -> dict:
    match v:
        case NatVal(v=x):
            return {"t": "nat", "v": _nat_out(x)}
        case BitVec(width=w, v=x):
            return {"t": "bv", "w": w, "v": _nat_out(x)}
        case PairVal(first=a, second=b):
            return {"t": "pair", "a": value_to_json(a), "b": value_to_json(b)}
        case BitStr(length=n, bits=x):
            return {"t": "bs", "l": n, "v": _nat_out(x)}
    raise DomainError(f"not a Value: {v!r}")


def value_from_json(obj: Any) -> Value:
    try:
        tag = obj["t"]
        if tag == "nat":
            return NatVal(_nat_in(obj["v"]))
        if tag == "bv":
            return BitVec(_nat_in(obj["w"]), _nat_in(obj["v"]))
        if tag == "pair":
            return PairVal(value_from_json(obj["a"]), value_from_json(obj["b"]))
        if tag == "bs":
            return BitStr(_nat_in(obj["l"]), _nat_in(obj["v"]))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed value JSON {obj!r}") from exc
    raise DomainError(f"unknown value tag in {obj!r}")


def param_to_json(a: Parameter) -> dict:
    match a:
        case Scalar(v=x):
            return {"t": "scalar", "v": _nat_out(x)}
        case ParamPair(a=p, a2=q):
            return {"t": "ppair", "a": param_to_json(p), "b": param_to_json(q)}
        case Tagged(index=i, inner=p):
            return {"t": "tagged", "i": i, "a": param_to_json(p)}
        case AuthTriple(a0=p, sigma=s, d=d):
            return {"t": "auth", "a0": param_to_json(p), "sigma": list(s.mapping), "d": _nat_out(d)}
    raise DomainError(f"not a Parameter: {a!r}")


def param_from_json(obj: Any) -> Parameter:
    try:
        tag = obj["t"]
        if tag == "scalar":
            return Scalar(_nat_in(obj["v"]))
        if tag == "ppair":
            return ParamPair(param_from_json(obj["a"]), param_from_json(obj["b"]))
        if tag == "tagged":
            return Tagged(_nat_in(obj["i"]), param_from_json(obj["a"]))
        if tag == "auth":
            mapping = tuple(_nat_in(i) for i in obj["sigma"])
            return AuthTriple(param_from_json(obj["a0"]), Involution(len(mapping), mapping), _nat_in(obj["d"]))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed parameter JSON {obj!r}") from exc
    raise DomainError(f"unknown parameter tag in {obj!r}")


def format_value(v: Value) -> str:
    """Compact human form: naturals and vectors as decimals, pairs as [a,b]."""
    match v:
        case NatVal(v=x) | BitVec(v=x):
            return str(x)
        case BitStr(length=n, bits=x):
            return format(x, f"0{n}b")
        case PairVal(first=a, second=b):
            return f"[{format_value(a)},{format_value(b)}]"
    raise DomainError(f"not a Value: {v!r}")
