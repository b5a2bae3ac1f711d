import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from lingokit import (
    CompositionError,
    HorizontalSpec,
    NatVal,
    PairVal,
    ParamPair,
    Scalar,
    Tagged,
    apply_f,
    apply_g,
    check_compliance,
    dnc_lingo,
    functional,
    horizontal,
    reverse_dnc_lingo,
    sharp,
    throw_biased,
    uses_default,
    xor_bseq_lingo,
    xor_lingo,
)
from lingokit.compose import default_output
from lingokit.values import sample_value

weights = st.lists(st.integers(1, 20), min_size=2, max_size=6)


def pair(x, y):
    return PairVal(NatVal(x), NatVal(y))


def test_throw_examples():
    assert throw_biased(0, (1, 1)) == 1
    assert throw_biased(1, (1, 1)) == 2
    assert [throw_biased(d, (3, 1)) for d in range(4)] == [1, 1, 1, 2]


@given(st.integers(0, 2**80), weights)
def test_throw_matches_reference(draw, bias):
    assert throw_biased(draw, bias) == oracle.throw(draw, bias)


@given(weights)
def test_throw_covers_each_face_by_its_weight(bias):
    faces = [throw_biased(d, bias) for d in range(sum(bias))]
    assert [faces.count(i + 1) for i in range(len(bias))] == list(bias)


def test_throw_frequency_at_scale():
    rng = random.Random(0)
    hits = sum(throw_biased(rng.getrandbits(64), (3, 1)) == 1 for _ in range(100_000))
    assert abs(hits / 100_000 - 0.75) <= 0.01


@pytest.mark.parametrize("bias", [(1,), (0, 1), (1, -2), (True, 1)])
def test_throw_rejects_bad_bias(bias):
    with pytest.raises(Exception):
        throw_biased(0, bias)


def test_horizontal_spec_errors():
    with pytest.raises(CompositionError):
        HorizontalSpec(((dnc_lingo(), pair(1, 0)),), (1,))
    with pytest.raises(CompositionError):
        HorizontalSpec(((dnc_lingo(), pair(1, 0)), (xor_lingo(8), None)), (1, 1))
    with pytest.raises(CompositionError):
        HorizontalSpec(((dnc_lingo(), NatVal(0)), (xor_bseq_lingo(), NatVal(0))), (1, 1))
    with pytest.raises(CompositionError):
        HorizontalSpec(((dnc_lingo(), pair(1, 0)), (xor_bseq_lingo(), NatVal(0))), (1, 1, 1))


HOR = horizontal(HorizontalSpec(((xor_bseq_lingo(), NatVal(0)), (dnc_lingo(), pair(1, 0))), (1, 1)))


@given(st.integers(0, 2**64), st.integers(0, 2**32), st.sampled_from([1, 2]))
def test_horizontal_round_trip(d1, a, i):
    tag = Tagged(i, Scalar(a))
    assert apply_g(HOR, apply_f(HOR, NatVal(d1), tag), tag) == NatVal(d1)


def test_horizontal_default_branch():
    tag = Tagged(2, Scalar(3))
    # a natural is not a dnc output, so branch 2 decodes its default
    assert uses_default(HOR, NatVal(9), tag)
    assert apply_g(HOR, NatVal(9), tag) == apply_g(dnc_lingo(), pair(1, 0), Scalar(3)) == NatVal(0)
    assert not uses_default(HOR, pair(3, 3), tag)
    assert not check_compliance(HOR, NatVal(9), tag)


def test_default_output_decodes_for_every_parameter():
    d0 = default_output(dnc_lingo())
    assert d0 == pair(1, 0)
    assert default_output(reverse_dnc_lingo()) == pair(0, 1)
    assert default_output(xor_bseq_lingo()) == NatVal(0)
    for a in range(100):
        assert apply_g(dnc_lingo(), d0, Scalar(a)) == NatVal(0)


def test_lemma1_horizontal_of_checkable_branches():
    hor = horizontal(
        HorizontalSpec(((sharp(xor_bseq_lingo()), PairVal(NatVal(0), NatVal(0))), (dnc_lingo(), pair(1, 0))), (1, 1))
    )
    assert hor.f_checkable
    rng = random.Random(4)
    for _ in range(500):
        a = hor.params.sample(rng)
        assert not check_compliance(hor, hor.witness(a), a)


def test_horizontal_with_symmetric_branch_is_not_checkable():
    assert not HOR.f_checkable


def test_functional_example():
    fun = functional(xor_bseq_lingo(), dnc_lingo())
    a = ParamPair(Scalar(5), Scalar(3))
    assert apply_f(fun, NatVal(13), a) == pair(2, 3)
    assert apply_g(fun, pair(2, 3), a) == NatVal(13)


def test_functional_domains_must_chain():
    with pytest.raises(CompositionError):
        functional(dnc_lingo(), xor_bseq_lingo())
    with pytest.raises(CompositionError):
        functional(xor_lingo(8), dnc_lingo())


@given(st.integers(0, 2**64), st.integers(0, 2**64), st.integers(0, 2**20))
def test_functional_round_trip(d1, a, a2):
    fun = functional(xor_bseq_lingo(), dnc_lingo())
    p = ParamPair(Scalar(a), Scalar(a2))
    assert apply_g(fun, apply_f(fun, NatVal(d1), p), p) == NatVal(d1)


@given(st.integers(0, 2**32), st.integers(0, 2**20), st.integers(0, 2**30), st.integers(0, 100))
def test_lemma2_functional_keeps_second_rejections(a, a2, x, extra):
    fun = functional(xor_bseq_lingo(), dnc_lingo())
    forged = pair(x, a2 + 2 + extra)
    assert not check_compliance(dnc_lingo(), forged, Scalar(a2))
    assert not check_compliance(fun, forged, ParamPair(Scalar(a), Scalar(a2)))


def test_nested_compositions_are_lingos():
    inner = functional(xor_bseq_lingo(), sharp(dnc_lingo()))
    rng = random.Random(8)
    for _ in range(300):
        a = inner.params.sample(rng)
        d1 = sample_value(inner.d1, rng)
        assert apply_g(inner, apply_f(inner, d1, a), a) == d1
