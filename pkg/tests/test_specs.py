import pytest
from hypothesis import given
from hypothesis import strategies as st

from lingokit import (
    BitVec,
    BitVecs,
    ConfigError,
    NatVal,
    PairVal,
    ParamPair,
    Scalar,
    parse_lingo,
    parse_param,
    parse_value,
)
from lingokit.values import value_to_json
from strategies import values

SPECS = [
    "xor:8",
    "xorbseq",
    "dnc",
    "rdnc",
    "sharp(xor:8)",
    "sharp(dnc)",
    "hor(xorbseq,dnc)",
    "hor(dnc,rdnc;bias=1,1)",
    "hor(xorbseq,dnc,rdnc;bias=3,1,2;d0=5,[1,0],[0,1])",
    "fun(xorbseq,dnc)",
    "auth(xorbseq,j=8,k=16)",
    "auth(xor:16,j=4,k=8)",
]


@pytest.mark.parametrize("spec", SPECS)
def test_ids_reparse_to_themselves(spec):
    lingo = parse_lingo(spec)
    assert parse_lingo(lingo.id).id == lingo.id


def test_whitespace_is_ignored():
    assert parse_lingo(" hor( xorbseq , dnc ; bias = 1 , 5 ) ").id == parse_lingo("hor(xorbseq,dnc;bias=1,5)").id


def test_defaults_and_bias_in_id():
    assert parse_lingo("hor(xorbseq,dnc)").id == "hor(xorbseq,dnc;bias=1,1;d0=0,[1,0])"
    lingo = parse_lingo("hor(xorbseq,dnc;d0=7,[2,1])")
    assert lingo.options["defaults"] == (NatVal(7), PairVal(NatVal(2), NatVal(1)))


@pytest.mark.parametrize(
    "bad",
    [
        "",
        "xor",
        "xor:0",
        "xor:x",
        "sharp(",
        "hor(dnc)",
        "hor(dnc,rdnc;bias=1)",
        "hor(dnc,rdnc;bias=0,1)",
        "hor(xor:8,dnc)",
        "hor(dnc,rdnc;d0=1,2)",
        "fun(dnc,xorbseq)",
        "auth(xorbseq,j=8)",
        "auth(dnc,j=8,k=16)",
        "auth(xorbseq,j=8,k=16,q=1)",
        "dnc extra",
        "nonsense",
    ],
)
def test_bad_specs_raise_config_error(bad):
    with pytest.raises(ConfigError):
        parse_lingo(bad)


def test_auth_with_too_few_oids():
    with pytest.raises(ConfigError):
        parse_lingo("auth(xorbseq,j=8,k=16)", oids=["only"])


def test_value_shorthand():
    assert parse_value("13") == NatVal(13)
    assert parse_value("8:3") == BitVec(8, 3)
    assert parse_value("3", BitVecs(8)) == BitVec(8, 3)
    assert parse_value("[3, 3]") == PairVal(NatVal(3), NatVal(3))
    with pytest.raises(ConfigError):
        parse_value("[3,")
    with pytest.raises(ConfigError):
        parse_value("{bad json")


@given(values)
def test_value_json_text_round_trip(v):
    import json

    assert parse_value(json.dumps(value_to_json(v))) == v


def test_param_shorthand():
    assert parse_param("5") == Scalar(5)
    assert parse_param("[1,[2,3]]") == ParamPair(Scalar(1), ParamPair(Scalar(2), Scalar(3)))
    for bad in ("-1", "[1]", "x"):
        with pytest.raises(ConfigError):
            parse_param(bad)
