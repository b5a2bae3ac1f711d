import pytest

from lingokit import (
    DialectActor,
    Message,
    MqttBroker,
    MqttClient,
    NatVal,
    Nats,
    PairVal,
    PayloadCodec,
    RoutingError,
    SecretSeed,
    param_for,
    parse_lingo,
    prf,
    rule_deliver,
    rule_in,
    rule_out,
    step,
)
from lingokit.mqtt import CONNECT, PUBLISH, Connect, MqttPayload, Publish

SEED = SecretSeed.from_hex("000102030405060708090a0b0c0d0e0f")
NAT = PayloadCodec(Nats())


def actor(spec, inner=None, aid="b"):
    return DialectActor(aid, inner or MqttBroker(aid, NAT), parse_lingo(spec) if spec else None, SEED)


def test_rule_in_buffers_and_routes():
    a = actor("dnc")
    m = Message("b", "c", PairVal(NatVal(1), NatVal(0)), True)
    assert rule_in(a, m).in_buffer == (m,)
    with pytest.raises(RoutingError):
        rule_in(a, Message("x", "c", NatVal(1), True))
    with pytest.raises(RoutingError):
        rule_in(a, Message("b", "c", NatVal(1), False))


def test_rule_out_xorbseq_wire():
    client = MqttClient("c", NAT, (Connect("b"),))
    a = DialectActor("c", client, parse_lingo("xorbseq"), SEED)
    a, _ = step(a)  # inner emits connect into the outbox
    c = NAT.encode(MqttPayload(CONNECT)).v
    a, wire = rule_out(a)
    assert wire[0].payload == NatVal(c ^ prf(SEED, 0))
    assert wire[0].dialected and a.counters.sent("b") == 1


def test_rule_out_without_outbox_is_noop():
    a = actor("dnc")
    assert rule_out(a) == (a, ())


def test_dnc_large_remainder_is_rejected_before_inner():
    a = actor("dnc")
    param = param_for(a.lingo, SEED, 0).v
    forged = Message("b", "c", PairVal(NatVal(5), NatVal(param + 2)), True)
    a = rule_deliver(rule_in(a, forged))
    assert a.rejected == 1 and a.inbox == () and a.counters.received("c") == 0


def test_genuine_message_is_delivered():
    lingo = parse_lingo("dnc")
    plain = NAT.encode(MqttPayload(CONNECT))
    wire = lingo.f(plain, param_for(lingo, SEED, 0))
    a = rule_deliver(rule_in(actor("dnc"), Message("b", "c", wire, True)))
    assert a.rejected == 0 and a.inbox[0].payload == plain and a.counters.received("c") == 1


def test_idle_step_is_noop():
    a = actor("dnc")
    assert a.idle()
    assert step(a) == (a, ())


def test_one_pending_outbound_emits_one_message():
    a = DialectActor("c", MqttClient("c", NAT, (Connect("b"),)), parse_lingo("sharp(dnc)"), SEED)
    a, first = step(a)
    assert first == () and len(a.outbox) == 1
    a, emitted = step(a)
    assert len(emitted) == 1 and emitted[0].dialected and emitted[0].to == "b"
    assert step(a) == (a, ())


def test_dialected_actor_needs_seed():
    with pytest.raises(Exception):
        DialectActor("b", MqttBroker("b", NAT), parse_lingo("dnc"), None)


def _wires(spec, count, body=2**40 + 7):
    script = (Connect("b"),) + (Publish(1, body),) * count
    client = MqttClient("c", NAT, script, peer=None)
    a = DialectActor("c", client, parse_lingo(spec), SEED)
    # pretend the handshake finished so publishes flow without a broker
    a, _ = step(a)
    a, _ = step(a)
    a = DialectActor("c", MqttClient("c", NAT, script[1:], peer="b"), a.lingo, SEED, counters=a.counters)
    wires = []
    for _ in range(2 * count):
        a, out = step(a)
        wires.extend(w.payload for w in out)
    return wires


@pytest.mark.parametrize("spec", ["xorbseq", "dnc", "sharp(dnc)", "hor(xorbseq,dnc)", "auth(xorbseq,j=8,k=16)"])
def test_moving_target(spec):
    wires = _wires(spec, 200)
    assert len(wires) == 200
    repeats = sum(x == y for x, y in zip(wires, wires[1:]))
    # 16-bit dnc parameters collide at about 2^-16 per step
    assert repeats <= 2


def test_dnc_does_not_move_below_the_divisor():
    # f(n, a) = (1, n) whenever n < a + 2, whatever a is
    wires = _wires("dnc", 200, body=0)
    n = NAT.encode(MqttPayload(PUBLISH, 1, 0)).v
    lingo = parse_lingo("dnc")
    predicted = [lingo.f(NatVal(n), param_for(lingo, SEED, i)) for i in range(1, 201)]
    assert wires == predicted
    assert sum(w == PairVal(NatVal(1), NatVal(n)) for w in wires) > 190
