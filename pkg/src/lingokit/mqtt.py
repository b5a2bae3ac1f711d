"""A toy MQTT client/broker pair, parametric on the payload domain.

Commands are packed into one natural, least significant field first:
a 4-bit tag, then the topic, then the body.  Unbounded naturals get an
8-bit topic; fixed widths w give the topic min(8, w - 4) bits and the body
whatever remains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .dialect import Message
from .errors import ArgError, ConfigError, ProtocolError
from .values import BitVec, BitVecs, NatVal, Nats, Value, evolve

CONNECT, CONNACK, SUBSCRIBE, PUBLISH, DISCONNECT = 1, 2, 3, 4, 5
TAG_BITS = 4
TOPIC_BITS = 8
TAG_NAMES = {CONNECT: "connect", CONNACK: "connack", SUBSCRIBE: "subscribe", PUBLISH: "publish", DISCONNECT: "disconnect"}


@dataclass(frozen=True)
class MqttPayload:
    tag: int
    topic: int = 0
    body: int = 0


@dataclass(frozen=True)
class PayloadCodec:
    domain: Nats | BitVecs

    def __post_init__(self):
        if not isinstance(self.domain, (Nats, BitVecs)):
            raise ArgError(f"MQTT payloads need a natural or bit-vector domain, got {self.domain!r}")
        width = self.domain.width if isinstance(self.domain, BitVecs) else self.domain.bits
        if width is not None and width < TAG_BITS:
            raise ArgError(f"a {width}-bit payload cannot hold the command tag")
        topic_bits = TOPIC_BITS if width is None else min(TOPIC_BITS, width - TAG_BITS)
        object.__setattr__(self, "width", width)
        object.__setattr__(self, "topic_bits", topic_bits)
        object.__setattr__(self, "body_bits", None if width is None else width - TAG_BITS - topic_bits)

    def encode(self, p: MqttPayload) -> Value:
        if p.topic >> self.topic_bits:
            raise ArgError(f"topic {p.topic} needs more than {self.topic_bits} bits")
        if self.body_bits is not None and p.body >> self.body_bits:
            raise ArgError(f"body {p.body:#x} needs more than {self.body_bits} bits")
        x = p.tag | (p.topic << TAG_BITS) | (p.body << (TAG_BITS + self.topic_bits))
        return BitVec(self.width, x) if isinstance(self.domain, BitVecs) else NatVal(x)

    def decode(self, v: Value) -> MqttPayload:
        if not self.domain.contains(v):
            raise ProtocolError(f"payload {v!r} is outside {self.domain!r}")
        x = v.v
        tag = x & ((1 << TAG_BITS) - 1)
        topic = (x >> TAG_BITS) & ((1 << self.topic_bits) - 1)
        body = x >> (TAG_BITS + self.topic_bits)
        if tag not in TAG_NAMES:
            raise ProtocolError(f"unknown command tag {tag}")
        if tag in (CONNECT, CONNACK, DISCONNECT) and (topic or body):
            raise ProtocolError(f"{TAG_NAMES[tag]} carries no topic or body")
        if tag == SUBSCRIBE and body:
            raise ProtocolError("subscribe carries no body")
        return MqttPayload(tag, topic, body)


# -- script commands ----------------------------------------------------------


@dataclass(frozen=True)
class Connect:
    broker: str


@dataclass(frozen=True)
class Subscribe:
    topic: int


@dataclass(frozen=True)
class Publish:
    topic: int
    body: int


@dataclass(frozen=True)
class Disconnect:
    pass


Command = Connect | Subscribe | Publish | Disconnect


def parse_command(text: str, default_broker: str | None = None) -> Command:
    """``connect[:broker]``, ``subscribe:<topic>``, ``publish:<topic>:<hexbody>``, ``disconnect``."""
    parts = text.strip().split(":")
    try:
        match parts:
            case ["connect"] if default_broker is not None:
                return Connect(default_broker)
            case ["connect", broker] if broker:
                return Connect(broker)
            case ["subscribe", topic]:
                return Subscribe(int(topic))
            case ["publish", topic, body]:
                return Publish(int(topic), int(body, 16) if body else 0)
            case ["disconnect"]:
                return Disconnect()
    except ValueError as exc:
        raise ConfigError(f"bad number in command {text!r}") from exc
    raise ConfigError(f"unknown command {text!r}")


# -- client -------------------------------------------------------------------


@dataclass(frozen=True)
class MqttClient:
    id: str
    codec: PayloadCodec
    script: tuple[Command, ...] = ()
    peer: str | None = None
    pending: str | None = None
    received: tuple[tuple[int, int], ...] = ()

    def ready(self) -> bool:
        if not self.script:
            return False
        if isinstance(self.script[0], Connect):
            return self.pending is None
        return self.peer is not None

    def step(self, inbox: tuple[Message, ...]) -> tuple["MqttClient", tuple[Message, ...]]:
        return client_step(self, inbox)


def client_step(c: MqttClient, inbox: tuple[Message, ...]) -> tuple[MqttClient, tuple[Message, ...]]:
    """Consume the inbox head if there is one, otherwise run the next enabled command."""
    if inbox:
        msg = inbox[0]
        p = c.codec.decode(msg.payload)
        if p.tag == CONNACK:
            if c.pending != msg.sender:
                raise ProtocolError(f"{c.id}: unexpected connack from {msg.sender}")
            return evolve(c, peer=msg.sender, pending=None), ()
        if p.tag == PUBLISH and msg.sender == c.peer:
            return evolve(c, received=c.received + ((p.topic, p.body),)), ()
        raise ProtocolError(f"{c.id}: cannot handle {TAG_NAMES[p.tag]} from {msg.sender}")
    if not c.ready():
        return c, ()
    cmd, rest = c.script[0], c.script[1:]
    match cmd:
        case Connect(broker=b):
            return evolve(c, script=rest, pending=b), (Message(b, c.id, c.codec.encode(MqttPayload(CONNECT))),)
        case Subscribe(topic=t):
            return evolve(c, script=rest), (Message(c.peer, c.id, c.codec.encode(MqttPayload(SUBSCRIBE, t))),)
        case Publish(topic=t, body=body):
            return evolve(c, script=rest), (Message(c.peer, c.id, c.codec.encode(MqttPayload(PUBLISH, t, body))),)
        case Disconnect():
            out = Message(c.peer, c.id, c.codec.encode(MqttPayload(DISCONNECT)))
            return evolve(c, script=rest, peer=None), (out,)
    raise ArgError(f"unknown command {cmd!r}")


# -- broker -------------------------------------------------------------------


@dataclass(frozen=True)
class MqttBroker:
    id: str
    codec: PayloadCodec
    peers: frozenset[str] = frozenset()
    subs: Mapping[int, frozenset[str]] = field(default_factory=dict)
    log: tuple[tuple[str, int, int, int], ...] = ()
    non_peer_drops: int = 0
    malformed_drops: int = 0

    def ready(self) -> bool:
        return False

    def step(self, inbox: tuple[Message, ...]) -> tuple["MqttBroker", tuple[Message, ...]]:
        return broker_step(self, inbox)


def broker_step(b: MqttBroker, inbox: tuple[Message, ...]) -> tuple[MqttBroker, tuple[Message, ...]]:
    """Handle the inbox head.  Malformed input and traffic from non-peers is dropped and counted."""
    if not inbox:
        return b, ()
    msg = inbox[0]
    try:
        p = b.codec.decode(msg.payload)
    except ProtocolError:
        return evolve(b, malformed_drops=b.malformed_drops + 1), ()
    who = msg.sender
    if p.tag == CONNECT:
        b = evolve(b, peers=b.peers | {who}, log=b.log + ((who, p.tag, 0, 0),))
        return b, (Message(who, b.id, b.codec.encode(MqttPayload(CONNACK))),)
    if who not in b.peers:
        return evolve(b, non_peer_drops=b.non_peer_drops + 1), ()
    log = b.log + ((who, p.tag, p.topic, p.body),)
    if p.tag == SUBSCRIBE:
        subs = {**b.subs, p.topic: b.subs.get(p.topic, frozenset()) | {who}}
        return evolve(b, subs=subs, log=log), ()
    if p.tag == PUBLISH:
        out = tuple(
            Message(peer, b.id, b.codec.encode(MqttPayload(PUBLISH, p.topic, p.body)))
            for peer in sorted(b.subs.get(p.topic, frozenset()) - {who})
        )
        return evolve(b, log=log), out
    if p.tag == DISCONNECT:
        subs = {t: s - {who} for t, s in b.subs.items() if s - {who}}
        return evolve(b, peers=b.peers - {who}, subs=subs, log=log), ()
    return evolve(b, malformed_drops=b.malformed_drops + 1), ()
