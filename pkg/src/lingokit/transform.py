"""Lingo transforms: the sharp pairing, malleability recipes, and authentication."""

from __future__ import annotations

import hashlib
import json
import random
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .core import Lingo, apply_f, apply_g, check_compliance
from .errors import ArgError, DomainError
from .params import SecretSeed, param_for, prf
from .values import (
    AuthParams,
    AuthTriple,
    BitStr,
    BitStrs,
    BitVec,
    BitVecs,
    Involution,
    Nats,
    PairParams,
    PairVal,
    ParamPair,
    Parameter,
    ProductOf,
    Scalar,
    Value,
    bit_width,
    from_bits,
    sample_value,
    subdomain,
    to_bits,
    two_values,
)

# -- sharp ------------------------------------------------------------------


def sharp(base: Lingo) -> Lingo:
    """Pair two encodings of the same input under distinct parameters.

    Decoding only reads the first half, so any pair whose halves disagree is
    detectable, which makes the result f-checkable whatever the base is.
    """
    d, d_other = two_values(base.d1)

    def f(d1, a: ParamPair) -> PairVal:
        return PairVal(base.f(d1, a.a), base.f(d1, a.a2))

    def g(d2: PairVal, a: ParamPair):
        return base.g(d2.first, a.a)

    def witness(a: ParamPair) -> PairVal:
        return PairVal(base.f(d, a.a), base.f(d_other, a.a2))

    return Lingo(
        id=f"sharp({base.id})",
        d1=base.d1,
        d2=ProductOf(base.d2, base.d2),
        params=PairParams(base.params, base.params, distinct=True),
        f=f,
        g=g,
        rule="sharp",
        parts=(base,),
        witness=witness,
    )


# -- malleability -----------------------------------------------------------


@dataclass(frozen=True)
class Recipe:
    """A forging term t(x, y) plus a sampler for the attacker's choices y in A0."""

    id: str
    target: str
    term: Callable[[Value, Parameter], Value]
    a0_sampler: Callable[[int], Parameter]


@dataclass(frozen=True)
class MalleabilityReport:
    samples: int
    cond1_violations: int
    cond2_violations: int

    @property
    def verdict(self) -> bool:
        return self.cond1_violations == 0 and self.cond2_violations == 0

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "cond1Violations": self.cond1_violations,
            "cond2Violations": self.cond2_violations,
            "verdict": self.verdict,
        }


def _nonzero(draw: int, bits: int) -> int:
    return draw % ((1 << bits) - 1) + 1


def xor_recipe(n: int) -> Recipe:
    if not isinstance(n, int) or n < 1:
        raise ArgError(f"xor width must be a positive integer, got {n!r}")
    if n == 1:
        sampler = lambda draw: Scalar(1)  # noqa: E731
    else:
        sampler = lambda draw: Scalar(_nonzero(draw, n))  # noqa: E731
    return Recipe(
        id=f"xor:{n}",
        target=f"xor:{n}",
        term=lambda x, y: BitVec(n, x.v ^ y.v),
        a0_sampler=sampler,
    )


def xor_sharp_recipe(n: int) -> Recipe:
    """Xor the attacker's first parameter half into both output halves."""
    if not isinstance(n, int) or n < 2:
        raise ArgError(f"the sharp xor recipe needs width >= 2, got {n!r}")
    full = 1 << n

    def sampler(draw: int) -> ParamPair:
        y1 = _nonzero(draw, n)
        y2 = (y1 + 1 + (draw >> n) % (full - 1)) % full
        return ParamPair(Scalar(y1), Scalar(y2))

    def term(x: PairVal, y: ParamPair) -> PairVal:
        return PairVal(BitVec(n, x.first.v ^ y.a.v), BitVec(n, x.second.v ^ y.a.v))

    return Recipe(id=f"xorsharp:{n}", target=f"sharp(xor:{n})", term=term, a0_sampler=sampler)


def theorem2_recipe(lingo: Lingo, a0_sampler: Callable[[int], Parameter]) -> Recipe:
    """Forge by encoding the observed output once more under the attacker's y."""
    if not subdomain(lingo.d2, lingo.d1):
        raise ArgError(f"{lingo.id}: output domain is not contained in the input domain")
    return Recipe(
        id=f"theorem2:{lingo.id}",
        target=lingo.id,
        term=lambda x, y: apply_f(lingo, x, y),
        a0_sampler=a0_sampler,
    )


def nonzero_scalar(draw: int) -> Scalar:
    """A0 sampler for 64-bit nonzero scalars."""
    return Scalar(_nonzero(draw, 64))


def verify_malleability(lingo: Lingo, recipe: Recipe, samples: int, seed: int) -> MalleabilityReport:
    """Count violations of both malleability conditions over seeded samples.

    Sample i draws (d1, a, a') from a generator keyed by PRF(seed, i), so any
    sample can be replayed on its own.  The second condition asks whether the
    forgery is some genuine encoding under a, which the compliance equation
    decides without a search.
    """
    if recipe.target != lingo.id:
        raise ArgError(f"recipe {recipe.id} targets {recipe.target}, not {lingo.id}")
    if samples < 1:
        raise ArgError("need at least one sample")
    key = SecretSeed.from_int(seed)
    cond1 = cond2 = 0
    for i in range(samples):
        rng = random.Random(prf(key, i))
        d1 = sample_value(lingo.d1, rng)
        a = lingo.params.sample(rng)
        a_att = recipe.a0_sampler(rng.getrandbits(64))
        genuine = apply_f(lingo, d1, a)
        forged = recipe.term(genuine, a_att)
        if forged == genuine:
            cond1 += 1
        if not lingo.d2.contains(forged) or not check_compliance(lingo, forged, a):
            cond2 += 1
    return MalleabilityReport(samples, cond1, cond2)


# -- authentication ---------------------------------------------------------

AUTH_DEFAULT_BITS = 64
_INVOLUTION_TAG = b"lingokit/involution"


@lru_cache(maxsize=65536)
def involution_from_seed(draw: int, size: int) -> Involution:
    """Deterministic involution: shuffle positions from ``draw`` and pair neighbours."""
    if size < 1:
        raise ArgError("involution size must be positive")
    stream = hashlib.shake_256(
        _INVOLUTION_TAG + size.to_bytes(4, "big") + draw.to_bytes(max(8, (draw.bit_length() + 7) // 8), "big")
    ).digest(4 * size)
    words = struct.unpack(f">{size}I", stream)
    # ranking positions by independent 32-bit keys is a uniform shuffle up to key ties
    order = sorted(range(size), key=words.__getitem__)
    perm = list(range(size))
    for p, q in zip(order[0::2], order[1::2]):
        perm[p], perm[q] = q, p
    return Involution.from_perm(perm)


@lru_cache(maxsize=65536)
def _route_hash(nonce: int, a: str, b: str) -> int:
    canon = json.dumps([nonce, a, b], separators=(",", ":")).encode()
    return int.from_bytes(hashlib.sha256(canon).digest(), "big")


@lru_cache(maxsize=256)
def _param0_seed(seed: SecretSeed) -> SecretSeed:
    return seed.derive("auth-param0")


def _layout_width(dom, default: int | None) -> int:
    w = bit_width(dom)
    if w is not None:
        return w
    if isinstance(dom, Nats) and default is not None:
        return default
    raise ArgError(f"{dom!r} has no fixed bit layout")


def _bounded(dom, width: int):
    return Nats(width) if isinstance(dom, Nats) and dom.bits is None else dom


def _has_layout(dom) -> bool:
    match dom:
        case Nats() | BitVecs() | BitStrs():
            return True
        case ProductOf(first=a, second=b):
            return _has_layout(a) and _has_layout(b) and bit_width(a) is not None and bit_width(b) is not None
    return False


@dataclass(frozen=True, eq=False)
class AuthLingo:
    """An authenticating wrapper around ``base`` with its derived lingo in ``lingo``."""

    base: Lingo
    n: int
    m: int
    j: int
    k: int
    oid_space: tuple[str, ...] | None
    lingo: Lingo | None = None

    @property
    def size(self) -> int:
        return self.m + self.j

    def hash(self, nonce: int, route: tuple[str, str]) -> int:
        a, b = route
        if a == b:
            raise ArgError(f"route endpoints must differ, got {route}")
        if self.oid_space is not None and (a not in self.oid_space or b not in self.oid_space):
            raise ArgError(f"route {route} is outside the identifier space")
        return _route_hash(nonce, a, b) >> (256 - self.j)

    def param(self, nonce: int, route: tuple[str, str], seed: SecretSeed) -> AuthTriple:
        a0 = param_for(self.base, _param0_seed(seed), nonce, route)
        return AuthTriple(a0, involution_from_seed(nonce, self.size), self.hash(nonce, route))

    def code(self, received: BitStr, a: AuthTriple) -> int:
        return a.sigma.apply(received.bits) & ((1 << self.j) - 1)

    def open(self, received: BitStr, a: AuthTriple):
        """Decoded input if ``received`` passes both the code and the compliance check, else None.

        Unpermutes once: compliance of the whole reduces to the hash slot matching
        ``a.d`` plus compliance of the payload slot under the base lingo.
        """
        c = a.sigma.apply(received.bits)
        if c & ((1 << self.j) - 1) != a.d:
            return None
        inner = from_bits(c >> self.j, self.lingo.options["base_d2"])
        try:
            d1 = apply_g(self.base, inner, a.a0)
            if self.base.f(d1, a.a0) != inner:
                return None
        except DomainError:
            return None
        return d1 if self.lingo.d1.contains(d1) else None


def authenticating(
    base: Lingo,
    j: int,
    k: int,
    oid_space=None,
    n: int | None = None,
    m: int | None = None,
) -> AuthLingo:
    """Wrap ``base`` so each output carries a permuted j-bit hash of the nonce and route.

    Unbounded natural domains are laid out on 64 bits unless n or m say otherwise.
    """
    for name, v in (("j", j), ("k", k)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ArgError(f"{name} must be a positive integer, got {v!r}")
    if j > 256:
        raise ArgError("the hash slot is at most 256 bits wide")
    if k > 64:
        raise ArgError("nonces are drawn from one 64-bit PRF word, so k <= 64")
    if not _has_layout(base.d1) or not _has_layout(base.d2):
        raise ArgError(f"{base.id}: domains must have a bit layout")
    if oid_space is not None:
        oid_space = tuple(oid_space)
        if len(set(oid_space)) < 2:
            raise ArgError("the identifier space needs at least two members")
    n = _layout_width(base.d1, n if n is not None else AUTH_DEFAULT_BITS)
    m = _layout_width(base.d2, m if m is not None else AUTH_DEFAULT_BITS)
    d1 = _bounded(base.d1, n)
    d2_base = _bounded(base.d2, m)
    size = m + j
    mask_j = (1 << j) - 1
    auth = AuthLingo(base, n, m, j, k, oid_space)

    def f(d, a: AuthTriple) -> BitStr:
        x = to_bits(apply_f(base, d, a.a0), d2_base)
        if x >> m:
            raise DomainError(f"{base.id} output does not fit in {m} bits")
        return BitStr(size, a.sigma.apply((x << j) | a.d))

    def g(b: BitStr, a: AuthTriple):
        return apply_g(base, from_bits(a.sigma.apply(b.bits) >> j, d2_base), a.a0)

    def witness(a: AuthTriple) -> BitStr:
        return BitStr(size, a.sigma.apply((a.d ^ 1) & mask_j))

    lingo = Lingo(
        id=f"auth({base.id},j={j},k={k})",
        d1=d1,
        d2=BitStrs(size),
        params=AuthParams(base.params, size, j),
        f=f,
        g=g,
        rule="auth",
        parts=(base,),
        options={"auth": auth, "base_d2": d2_base},
        witness=witness,
    )
    object.__setattr__(auth, "lingo", lingo)
    return auth


def auth_of(lingo: Lingo) -> AuthLingo | None:
    return lingo.options.get("auth") if lingo.rule == "auth" else None


def auth_check(auth: AuthLingo, received: Value, a: AuthTriple) -> bool:
    """True iff the hash slot of the unpermuted message equals the parameter's code."""
    if not isinstance(received, BitStr) or received.length != auth.size:
        raise DomainError(f"expected a {auth.size}-bit string, got {received!r}")
    return auth.code(received, a) == a.d


def flip_acceptance(auth: AuthLingo, flips: int, samples: int, seed: int) -> float:
    """Share of genuine messages that still pass every check after ``flips`` random bit flips.

    Flips are applied under the same parameter that produced the message.
    """
    if flips < 1 or flips > auth.size:
        raise ArgError(f"flips must lie in 1..{auth.size}")
    lingo = auth.lingo
    key = SecretSeed.from_int(seed)
    rng = random.Random(prf(key, 0))
    route = ("A", "B") if auth.oid_space is None else auth.oid_space[:2]
    accepted = 0
    for _ in range(samples):
        nonce = rng.getrandbits(auth.k)
        a = auth.param(nonce, route, key)
        b = apply_f(lingo, sample_value(lingo.d1, rng), a)
        mask = 0
        for pos in rng.sample(range(auth.size), flips):
            mask |= 1 << pos
        forged = BitStr(auth.size, b.bits ^ mask)
        if auth_check(auth, forged, a) and check_compliance(lingo, forged, a):
            accepted += 1
    return accepted / samples
