"""Shared keyed pseudo-randomness: the PRF, parameter rules, and peer counters.

Honest parties hold the same secret seed and the same message counters, so
``param_for`` yields them identical parameters without any exchange.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

from .compose import throw_biased
from .core import Lingo
from .errors import ArgError, ConfigError
from .values import ParamPair, Parameter, Scalar, Tagged

MIN_SEED_BYTES = 16
WORD = 1 << 64
# Added to the inner counter when both halves of a sharp parameter collide.
SHARP_RETRY_STRIDE = 0x9E37
DNC_PARAM_BITS = 16


@dataclass(frozen=True)
class SecretSeed:
    """The enclave's shared secret. Its repr never shows the key material."""

    key: bytes = field(repr=False)

    def __post_init__(self):
        if len(self.key) < MIN_SEED_BYTES:
            raise ConfigError(f"seed must be at least {MIN_SEED_BYTES * 8} bits")

    @classmethod
    def from_hex(cls, text: str) -> "SecretSeed":
        try:
            return cls(bytes.fromhex(text.strip()))
        except ValueError as exc:
            raise ConfigError("seed is not a hex string") from exc

    @classmethod
    def from_int(cls, n: int) -> "SecretSeed":
        return cls(n.to_bytes(max(MIN_SEED_BYTES, (n.bit_length() + 7) // 8), "big"))

    def derive(self, label: str, index: int = 0) -> "SecretSeed":
        """An independent seed for a named sub-stream."""
        h = hashlib.sha256(label.encode() + b"\x00" + self.key + (index % WORD).to_bytes(8, "big"))
        return SecretSeed(h.digest())


def prf(seed: SecretSeed, n: int) -> int:
    """SHA-256(seed || n as 64-bit big-endian), first 8 bytes as a big-endian natural."""
    digest = hashlib.sha256(seed.key + (n % WORD).to_bytes(8, "big")).digest()
    return int.from_bytes(digest[:8], "big")


def _wide_word(seed: SecretSeed, n: int, bits: int) -> int:
    words = -(-bits // 64)
    v = 0
    for i in range(words):
        v = (v << 64) | prf(seed, n * words + i)
    return v & ((1 << bits) - 1)


def param_for(lingo: Lingo, seed: SecretSeed, n: int, route: tuple[str, str] | None = None) -> Parameter:
    """The parameter both ends use for message number ``n``.

    ``route`` is the (sender, receiver) pair; only authenticating lingos use it.
    """
    rule = lingo.rule
    if rule == "xor":
        return Scalar(_wide_word(seed, n, lingo.options["width"]))
    if rule == "xorbseq":
        return Scalar(prf(seed, n))
    if rule in ("dnc", "rdnc"):
        return Scalar(prf(seed, n) % (1 << DNC_PARAM_BITS))
    if rule == "sharp":
        (base,) = lingo.parts
        first = param_for(base, seed, 2 * n, route)
        inner = 2 * n + 1
        second = param_for(base, seed, inner, route)
        while second == first:
            inner += SHARP_RETRY_STRIDE
            second = param_for(base, seed, inner, route)
        return ParamPair(first, second)
    if rule == "hor":
        return horizontal_param(lingo, seed, n, route)
    if rule == "fun":
        first, second = lingo.parts
        return ParamPair(param_for(first, seed, n, route), param_for(second, seed, n, route))
    if rule == "auth":
        if route is None:
            raise ArgError(f"{lingo.id} needs the (sender, receiver) route to derive parameters")
        auth = lingo.options["auth"]
        nonce = prf(seed, n) % (1 << auth.k)
        return auth.param(nonce, route, seed)
    if "param" in lingo.options:
        return lingo.options["param"](seed, n, route)
    raise ArgError(f"no parameter rule for {lingo.id}")


@lru_cache(maxsize=256)
def _die_seed(seed: SecretSeed) -> SecretSeed:
    # keeps the branch choice independent of the branch parameters drawn from the same n
    return seed.derive("die")


def horizontal_param(lingo: Lingo, seed: SecretSeed, n: int, route: tuple[str, str] | None = None) -> Tagged:
    """Throw the biased die on a separate PRF stream at n, then use the chosen branch's own rule on n."""
    face = throw_biased(prf(_die_seed(seed), n), lingo.options["bias"])
    return Tagged(face, param_for(lingo.parts[face - 1], seed, n, route))


@dataclass(frozen=True)
class PeerCounters:
    """Per-peer (sent, received) message counts; every peer starts at (0, 0)."""

    counts: Mapping[str, tuple[int, int]] = field(default_factory=dict)

    def get(self, peer: str) -> tuple[int, int]:
        return self.counts.get(peer, (0, 0))

    def sent(self, peer: str) -> int:
        return self.get(peer)[0]

    def received(self, peer: str) -> int:
        return self.get(peer)[1]

    def peers(self) -> list[str]:
        return sorted(self.counts)


def bump_send(pc: PeerCounters, peer: str) -> PeerCounters:
    s, r = pc.get(peer)
    return PeerCounters({**pc.counts, peer: (s + 1, r)})


def bump_recv(pc: PeerCounters, peer: str) -> PeerCounters:
    s, r = pc.get(peer)
    return PeerCounters({**pc.counts, peer: (s, r + 1)})
