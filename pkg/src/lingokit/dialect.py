"""The dialect meta-actor: wraps a protocol actor and speaks a lingo on the wire.

Outbound plain messages are encoded with f under the parameter for the
current per-peer send count; inbound wire messages are buffered, checked,
decoded with g under the receive count, and handed to the inner actor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Protocol

from .compose import uses_default
from .core import Lingo, apply_f, check_param
from .errors import ArgError, DomainError, ProtocolError, RoutingError
from .params import PeerCounters, SecretSeed, bump_recv, bump_send, param_for
from .transform import auth_of
from .values import PairVal, Parameter, Value, evolve, value_to_json


@dataclass(frozen=True)
class Message:
    to: str
    sender: str
    payload: Value
    dialected: bool = False
    # "legit" or "attacker"; bookkeeping for the simulator, never consulted by actors
    origin: str = "legit"


class ProtocolActor(Protocol):
    id: str

    def ready(self) -> bool: ...

    def step(self, inbox: tuple[Message, ...]) -> tuple["ProtocolActor", tuple[Message, ...]]: ...


@dataclass(frozen=True)
class TraceEvent:
    ev: str
    actor: str
    peer: str
    n: int
    wire: Value | None
    plain: Value | None = None
    origin: str = "legit"

    def to_json(self) -> dict:
        out: dict[str, Any] = {"ev": self.ev, "actor": self.actor, "peer": self.peer, "n": self.n}
        out["wire"] = None if self.wire is None else value_to_json(self.wire)
        if self.ev != "reject":
            out["plain"] = None if self.plain is None else value_to_json(self.plain)
        return out


@lru_cache(maxsize=8192)
def _param(lingo: Lingo, seed: SecretSeed, n: int, route: tuple[str, str]) -> Parameter:
    return param_for(lingo, seed, n, route)


def _split(lingo: Lingo, v: Value) -> tuple[Value, ...]:
    k = lingo.egress_arity
    if k == 1:
        return (v,)
    if "split" in lingo.options:
        return tuple(lingo.options["split"](v))
    if k == 2 and isinstance(v, PairVal):
        return (v.first, v.second)
    raise DomainError(f"{lingo.id}: cannot split {v!r} into {k} messages")


def _join(lingo: Lingo, parts: tuple[Value, ...]) -> Value:
    if len(parts) == 1:
        return parts[0]
    if "join" in lingo.options:
        return lingo.options["join"](parts)
    return PairVal(parts[0], parts[1])


@dataclass(frozen=True)
class DialectActor:
    """Fig.-2-style meta-actor state.  ``lingo=None`` gives an undialected pass-through."""

    id: str
    inner: Any
    lingo: Lingo | None
    seed: SecretSeed | None = field(default=None, repr=False)
    outbox: tuple[Message, ...] = ()
    inbox: tuple[Message, ...] = ()
    in_buffer: tuple[Message, ...] = ()
    counters: PeerCounters = field(default_factory=PeerCounters)
    rejected: int = 0
    default_hits: int = 0
    protocol_errors: int = 0

    def __post_init__(self):
        if self.lingo is not None:
            if self.seed is None:
                raise ArgError("a dialected actor needs the shared seed")
            if self.lingo.ingress_arity != 1:
                raise ArgError("only ingress arity 1 is supported")

    @property
    def dialected(self) -> bool:
        return self.lingo is not None

    def idle(self) -> bool:
        return not (self.inbox or self.outbox or self._deliverable() or self.inner.ready())

    def _deliverable(self) -> bool:
        k = 1 if self.lingo is None else self.lingo.egress_arity
        if len(self.in_buffer) < k:
            return False
        sender = self.in_buffer[0].sender
        return all(m.sender == sender for m in self.in_buffer[:k])


def rule_in(actor: DialectActor, msg: Message) -> DialectActor:
    if msg.to != actor.id:
        raise RoutingError(f"message for {msg.to} handed to {actor.id}")
    if msg.dialected != actor.dialected:
        raise RoutingError(f"{actor.id} cannot buffer a {'dialected' if msg.dialected else 'plain'} message")
    return evolve(actor, in_buffer=actor.in_buffer + (msg,))


def _out(actor: DialectActor) -> tuple[DialectActor, tuple[Message, ...], list[TraceEvent]]:
    msg = actor.outbox[0]
    peer = msg.to
    n = actor.counters.sent(peer)
    lingo = actor.lingo
    if lingo is None:
        wires = (evolve(msg, sender=actor.id),)
        events = [TraceEvent("out", actor.id, peer, n, msg.payload, msg.payload)]
    else:
        if not lingo.d1.contains(msg.payload):
            raise DomainError(f"{actor.id}: payload {msg.payload!r} is outside {lingo.id}'s input domain")
        a = _param(lingo, actor.seed, n, (actor.id, peer))
        encoded = apply_f(lingo, msg.payload, a)
        wires = tuple(Message(peer, actor.id, part, True, msg.origin) for part in _split(lingo, encoded))
        events = [TraceEvent("out", actor.id, peer, n, w.payload, msg.payload) for w in wires]
    actor = evolve(actor, outbox=actor.outbox[1:], counters=bump_send(actor.counters, peer))
    return actor, wires, events


def rule_out(actor: DialectActor) -> tuple[DialectActor, tuple[Message, ...]]:
    """Encode and emit the oldest outbound message; a no-op when there is none."""
    if not actor.outbox:
        return actor, ()
    actor, wires, _ = _out(actor)
    return actor, wires


def _open(lingo: Lingo, wire: Value, a: Parameter) -> Value | None:
    """Decoded payload when ``wire`` passes every check under ``a``, otherwise None."""
    if not lingo.d2.contains(wire):
        return None
    check_param(lingo, a)
    auth = auth_of(lingo)
    if auth is not None:
        return auth.open(wire, a)
    if lingo.cheap_reject is not None and lingo.cheap_reject(wire, a):
        return None
    plain = lingo.g(wire, a)
    # the compliance equation f(g(d2, a), a) == d2, reusing the decoded value
    if lingo.f_checkable and lingo.f(plain, a) != wire:
        return None
    return plain


def _deliver(actor: DialectActor) -> tuple[DialectActor, TraceEvent]:
    lingo = actor.lingo
    k = 1 if lingo is None else lingo.egress_arity
    taken, rest = actor.in_buffer[:k], actor.in_buffer[k:]
    sender = taken[0].sender
    origin = taken[0].origin
    n = actor.counters.received(sender)
    wire = taken[0].payload if lingo is None else _join(lingo, tuple(m.payload for m in taken))
    if lingo is None:
        plain, hit = wire, False
    else:
        a = _param(lingo, actor.seed, n, (sender, actor.id))
        try:
            plain = _open(lingo, wire, a)
        except (DomainError, ArgError):
            plain = None
        if plain is None:
            ev = TraceEvent("reject", actor.id, sender, n, wire, None, origin)
            return evolve(actor, in_buffer=rest, rejected=actor.rejected + 1), ev
        hit = uses_default(lingo, wire, a)
    delivered = Message(actor.id, sender, plain, False, origin)
    actor = evolve(
        actor,
        in_buffer=rest,
        inbox=actor.inbox + (delivered,),
        counters=bump_recv(actor.counters, sender),
        default_hits=actor.default_hits + hit,
    )
    return actor, TraceEvent("deliver", actor.id, sender, n, wire, plain, origin)


def rule_deliver(actor: DialectActor) -> DialectActor:
    """Check and decode the oldest buffered message, or count it as rejected."""
    if not actor._deliverable():
        return actor
    return _deliver(actor)[0]


def _inner(actor: DialectActor) -> DialectActor:
    try:
        inner, out = actor.inner.step(actor.inbox)
    except ProtocolError:
        return evolve(actor, inbox=actor.inbox[1:], protocol_errors=actor.protocol_errors + 1)
    return evolve(actor, inner=inner, inbox=actor.inbox[1:], outbox=actor.outbox + tuple(out))


def step_traced(actor: DialectActor) -> tuple[DialectActor, tuple[Message, ...], list[TraceEvent]]:
    """One rule application in the fixed order inner, out, deliver."""
    if actor.inbox or actor.inner.ready():
        return _inner(actor), (), []
    if actor.outbox:
        return _out(actor)
    if actor._deliverable():
        actor, ev = _deliver(actor)
        return actor, (), [ev]
    return actor, (), []


def step(actor: DialectActor) -> tuple[DialectActor, tuple[Message, ...]]:
    actor, emitted, _ = step_traced(actor)
    return actor, emitted
