import hashlib

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from lingokit import (
    ArgError,
    ConfigError,
    ParamPair,
    PeerCounters,
    Scalar,
    SecretSeed,
    Tagged,
    bump_recv,
    bump_send,
    horizontal_param,
    param_for,
    parse_lingo,
    prf,
    throw_biased,
)

SEED = SecretSeed.from_hex("00112233445566778899aabbccddeeff")


@given(st.integers(0, 2**80))
def test_prf_matches_reference(n):
    assert prf(SEED, n) == oracle.prf(SEED.key, n)


def test_prf_vector_is_sha256_prefix():
    digest = hashlib.sha256(bytes.fromhex("00112233445566778899aabbccddeeff") + bytes(7) + b"\x05").digest()
    assert prf(SEED, 5) == int.from_bytes(digest[:8], "big")
    assert prf(SEED, 5 + 2**64) == prf(SEED, 5)


def test_seed_rules():
    with pytest.raises(ConfigError):
        SecretSeed(b"short")
    with pytest.raises(ConfigError):
        SecretSeed.from_hex("zz" * 16)
    assert "0011" not in repr(SEED)
    assert SEED.derive("a") != SEED.derive("b") != SEED.derive("a", 1)
    assert SEED.derive("a", 3) == SEED.derive("a", 3)


@pytest.mark.parametrize(
    "spec", ["xor:8", "xor:256", "xorbseq", "dnc", "sharp(xor:8)", "hor(xorbseq,dnc;bias=1,5)", "fun(xorbseq,dnc)"]
)
def test_params_are_deterministic_and_in_domain(spec):
    lingo = parse_lingo(spec)
    first = [param_for(lingo, SEED, n) for n in range(10)]
    assert first == [param_for(lingo, SEED, n) for n in range(10)]
    assert all(lingo.params.contains(a) for a in first)


def test_param_rules():
    assert param_for(parse_lingo("xorbseq"), SEED, 3) == Scalar(prf(SEED, 3))
    assert param_for(parse_lingo("dnc"), SEED, 3) == Scalar(prf(SEED, 3) % 2**16)
    wide = param_for(parse_lingo("xor:256"), SEED, 1).v
    assert wide == int.from_bytes(b"".join(prf(SEED, 4 + i).to_bytes(8, "big") for i in range(4)), "big")
    fun = param_for(parse_lingo("fun(xorbseq,dnc)"), SEED, 7)
    assert fun == ParamPair(Scalar(prf(SEED, 7)), Scalar(prf(SEED, 7) % 2**16))


def test_sharp_halves_always_differ():
    # a 1-bit xor has only two parameters, so collisions must be retried away
    lingo = parse_lingo("sharp(xor:1)")
    for n in range(200):
        a = param_for(lingo, SEED, n)
        assert a.a != a.a2


def test_auth_needs_route():
    lingo = parse_lingo("auth(xorbseq,j=8,k=16)")
    with pytest.raises(ArgError):
        param_for(lingo, SEED, 0)
    assert param_for(lingo, SEED, 0, ("A", "B")) != param_for(lingo, SEED, 0, ("B", "A"))


def test_horizontal_param_replays():
    lingo = parse_lingo("hor(xorbseq,dnc;bias=1,5)")
    run = [horizontal_param(lingo, SEED, n) for n in range(10)]
    assert run == [horizontal_param(lingo, SEED, n) for n in range(10)]
    assert all(isinstance(a, Tagged) for a in run)


def test_horizontal_bias_share():
    lingo = parse_lingo("hor(xorbseq,dnc;bias=1,5)")
    share = sum(horizontal_param(lingo, SEED, n).index == 2 for n in range(10_000)) / 10_000
    assert abs(share - 5 / 6) <= 0.02


def test_branch_choice_is_independent_of_branch_parameter():
    # the xorbseq parameter's parity must not reveal which branch was thrown
    lingo = parse_lingo("hor(xorbseq,dnc)")
    picked = [horizontal_param(lingo, SEED, n) for n in range(4_000)]
    odd = sum(a.inner.v & 1 for a in picked if a.index == 1)
    total = sum(a.index == 1 for a in picked)
    assert 0.4 < odd / total < 0.6
    assert throw_biased(prf(SEED, 0), (1, 1)) in (1, 2)


def test_counters():
    pc = PeerCounters()
    assert bump_send(pc, "B").get("B") == (1, 0)
    assert bump_recv(bump_send(pc, "B"), "B").get("B") == (1, 1)
    for _ in range(5):
        pc = bump_send(pc, "B")
    assert pc.sent("B") == 5 and pc.received("B") == 0 and pc.get("C") == (0, 0)
    assert pc.peers() == ["B"]
