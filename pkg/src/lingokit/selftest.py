"""A quick invariant sweep over the shipped lingos, used by ``lingo selftest``."""

from __future__ import annotations

import random
from typing import Callable, Iterator

from .core import Lingo, apply_f, apply_g, check_compliance
from .params import SecretSeed
from .specs import parse_lingo
from .transform import auth_of, involution_from_seed
from .values import sample_value

SHIPPED = (
    "xor:8",
    "xor:256",
    "xorbseq",
    "dnc",
    "rdnc",
    "sharp(xor:8)",
    "sharp(dnc)",
    "hor(xorbseq,dnc)",
    "hor(dnc,rdnc;bias=1,1)",
    "fun(xorbseq,dnc)",
    "auth(xorbseq,j=8,k=16)",
)


def _law(lingo: Lingo, rng: random.Random) -> bool:
    d1 = sample_value(lingo.d1, rng)
    a = lingo.params.sample(rng)
    d2 = apply_f(lingo, d1, a)
    return lingo.d2.contains(d2) and apply_g(lingo, d2, a) == d1 and check_compliance(lingo, d2, a)


def _witness(lingo: Lingo, rng: random.Random) -> bool:
    a = lingo.params.sample(rng)
    return not check_compliance(lingo, lingo.witness(a), a)


def _auth_equation(lingo: Lingo, rng: random.Random) -> bool:
    auth = auth_of(lingo)
    seed = SecretSeed(rng.randbytes(16))
    nonce = rng.getrandbits(auth.k)
    a = auth.param(nonce, ("A", "B"), seed)
    b = apply_f(lingo, sample_value(lingo.d1, rng), a)
    return auth.code(b, a) == auth.hash(nonce, ("A", "B"))


def _involution(rng: random.Random) -> bool:
    sigma = involution_from_seed(rng.getrandbits(32), rng.randrange(1, 96))
    return sigma.compose(sigma) == tuple(range(1, sigma.size + 1))


def checks(samples: int) -> Iterator[tuple[str, Callable[[random.Random], bool]]]:
    for spec in SHIPPED:
        lingo = parse_lingo(spec)
        yield f"law {spec}", lambda rng, lg=lingo: _law(lg, rng)
        if lingo.f_checkable:
            yield f"witness {spec}", lambda rng, lg=lingo: _witness(lg, rng)
        if lingo.rule == "auth":
            yield f"code {spec}", lambda rng, lg=lingo: _auth_equation(lg, rng)
    yield "involution", _involution


def selftest(samples: int = 200, seed: int = 0, out=print) -> bool:
    ok = True
    for name, check in checks(samples):
        rng = random.Random(f"{seed}:{name}")
        passed = sum(1 for _ in range(samples) if check(rng))
        ok &= passed == samples
        out(f"{'ok  ' if passed == samples else 'FAIL'} {name}: {passed}/{samples}")
    return ok
