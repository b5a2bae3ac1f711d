"""Text forms: lingo spec strings, value and parameter shorthand.

Grammar (whitespace is ignored)::

    spec  := "xor:" INT | "xorbseq" | "dnc" | "rdnc"
           | "sharp(" spec ")"
           | "auth(" spec ("," KEY "=" INT)* ")"
           | "hor(" spec ("," spec)+ [";bias=" INT ("," INT)*] [";d0=" val ("," val)*] ")"
           | "fun(" spec "," spec ")"
    val   := INT | INT ":" INT | "[" val "," val "]"
"""

from __future__ import annotations

import json
import re

from .compose import HorizontalSpec, default_output, functional, horizontal
from .core import Lingo, dnc_lingo, reverse_dnc_lingo, xor_bseq_lingo, xor_lingo
from .errors import ConfigError, LingoError
from .transform import authenticating, sharp
from .values import (
    BitStr,
    BitStrs,
    BitVec,
    BitVecs,
    NatVal,
    PairVal,
    ParamPair,
    Parameter,
    ProductOf,
    Scalar,
    UnionOf,
    Value,
    param_from_json,
    value_from_json,
)

_WS = re.compile(r"\s+")


class _Parser:
    def __init__(self, text: str, oids):
        self.s = _WS.sub("", text)
        self.i = 0
        self.oids = oids

    def fail(self, msg: str):
        raise ConfigError(f"{msg} at offset {self.i} in {self.s!r}")

    def peek(self, lit: str) -> bool:
        return self.s.startswith(lit, self.i)

    def eat(self, lit: str) -> None:
        if not self.peek(lit):
            self.fail(f"expected {lit!r}")
        self.i += len(lit)

    def integer(self) -> int:
        m = re.compile(r"\d+").match(self.s, self.i)
        if not m:
            self.fail("expected an integer")
        self.i = m.end()
        return int(m.group())

    def value(self) -> Value:
        if self.peek("["):
            self.eat("[")
            a = self.value()
            self.eat(",")
            b = self.value()
            self.eat("]")
            return PairVal(a, b)
        x = self.integer()
        if self.peek(":"):
            self.eat(":")
            return BitVec(x, self.integer())
        return NatVal(x)

    def spec(self) -> Lingo:
        if self.peek("xorbseq"):
            self.eat("xorbseq")
            return xor_bseq_lingo()
        if self.peek("xor:"):
            self.eat("xor:")
            return xor_lingo(self.integer())
        if self.peek("rdnc"):
            self.eat("rdnc")
            return reverse_dnc_lingo()
        if self.peek("dnc"):
            self.eat("dnc")
            return dnc_lingo()
        if self.peek("sharp("):
            self.eat("sharp(")
            inner = self.spec()
            self.eat(")")
            return sharp(inner)
        if self.peek("fun("):
            self.eat("fun(")
            first = self.spec()
            self.eat(",")
            second = self.spec()
            self.eat(")")
            return functional(first, second)
        if self.peek("auth("):
            return self.auth()
        if self.peek("hor("):
            return self.hor()
        self.fail("unknown lingo")

    def auth(self) -> Lingo:
        self.eat("auth(")
        base = self.spec()
        opts: dict[str, int] = {}
        while self.peek(","):
            self.eat(",")
            m = re.compile(r"[a-z]+").match(self.s, self.i)
            if not m or m.group() not in ("j", "k", "n", "m") or m.group() in opts:
                self.fail("expected one of j=, k=, n=, m=")
            self.i = m.end()
            self.eat("=")
            opts[m.group()] = self.integer()
        self.eat(")")
        if "j" not in opts or "k" not in opts:
            self.fail("auth needs both j= and k=")
        return authenticating(base, oid_space=self.oids, **opts).lingo

    def hor(self) -> Lingo:
        self.eat("hor(")
        lingos = [self.spec()]
        while self.peek(","):
            self.eat(",")
            lingos.append(self.spec())
        bias = [1] * len(lingos)
        defaults = [default_output(lg) for lg in lingos]
        if self.peek(";bias="):
            self.eat(";bias=")
            bias = [self.integer()]
            while self.peek(","):
                self.eat(",")
                bias.append(self.integer())
        if self.peek(";d0="):
            self.eat(";d0=")
            vals = [self.value()]
            while self.peek(","):
                self.eat(",")
                vals.append(self.value())
            if len(vals) != len(lingos):
                self.fail(f"d0 lists {len(vals)} values for {len(lingos)} lingos")
            defaults = [coerce(v, lg.d2) for v, lg in zip(vals, lingos)]
        self.eat(")")
        return horizontal(HorizontalSpec(tuple(zip(lingos, defaults)), tuple(bias)))


def parse_lingo(text: str, oids=None) -> Lingo:
    """Build a lingo from its spec string; ``oids`` bounds the route space of auth lingos."""
    p = _Parser(text, oids)
    try:
        lingo = p.spec()
    except ConfigError:
        raise
    except LingoError as exc:
        raise ConfigError(f"invalid lingo spec {text!r}: {exc}") from exc
    if p.i != len(p.s):
        p.fail("trailing input")
    return lingo


def coerce(v: Value, dom) -> Value:
    """Reinterpret shorthand naturals as vectors or bit strings when ``dom`` asks for one."""
    match v, dom:
        case NatVal(v=x), BitVecs(width=w):
            return BitVec(w, x)
        case NatVal(v=x), BitStrs(length=n):
            return BitStr(n, x)
        case PairVal(first=a, second=b), ProductOf(first=da, second=db):
            return PairVal(coerce(a, da), coerce(b, db))
        case _, UnionOf(branches=bs):
            for _, d in bs:
                c = coerce(v, d)
                if d.contains(c):
                    return c
    return v


def parse_value(text: str, dom=None) -> Value:
    text = text.strip()
    try:
        if text.startswith("{"):
            v = value_from_json(json.loads(text))
        else:
            p = _Parser(text, None)
            v = p.value()
            if p.i != len(p.s):
                p.fail("trailing input")
    except (LingoError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read value {text!r}: {exc}") from exc
    return coerce(v, dom) if dom is not None else v


def parse_param(text: str) -> Parameter:
    """Decimal is a Scalar, ``[p,q]`` a pair; anything else must be parameter JSON."""
    text = _WS.sub("", text)
    try:
        if text.startswith("{"):
            return param_from_json(json.loads(text))
        return _param_term(text)
    except (LingoError, json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(f"cannot read parameter {text!r}: {exc}") from exc


def _param_term(text: str) -> Parameter:
    if text.startswith("[") and text.endswith("]"):
        body = text[1:-1]
        depth = 0
        for idx, ch in enumerate(body):
            depth += ch == "["
            depth -= ch == "]"
            if ch == "," and depth == 0:
                return ParamPair(_param_term(body[:idx]), _param_term(body[idx + 1 :]))
        raise ValueError("pair needs two components")
    if not text.isdigit():
        raise ValueError("not a natural")
    return Scalar(int(text))
