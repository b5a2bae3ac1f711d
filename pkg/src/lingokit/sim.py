"""Deterministic network of dialected MQTT actors with an on-path attacker.

Channels are reliable FIFO queues per ordered actor pair.  Each round first
hands every channel head to its receiver, then steps every actor once in id
order.  The attacker sees each legitimate wire message as it is emitted and
may append a forgery right behind it on the same channel; it has no way to
drop or alter what is already in flight.
"""

from __future__ import annotations

import gc
import json
import math
import random
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .core import Lingo
from .dialect import DialectActor, Message, TraceEvent, rule_in, step_traced
from .errors import ConfigError, LingoError
from .mqtt import MqttBroker, MqttClient, PayloadCodec, parse_command
from .params import SecretSeed
from .specs import parse_lingo
from .transform import nonzero_scalar, theorem2_recipe, xor_recipe, xor_sharp_recipe
from .values import BitStr, BitVec, BitVecs, NatVal, Nats, PairVal, Value, sample_value

# -- configuration ------------------------------------------------------------

STRATEGY_NAMES = {
    "none": "none",
    "replaylast": "replay_last",
    "randominject": "random_inject",
    "recipeinject": "recipe_inject",
    "structuralzero": "structural_zero",
    "bitflipinject": "bitflip_inject",
}


def _valid_flips(flips) -> bool:
    def nat(x):
        return isinstance(x, int) and not isinstance(x, bool) and x >= 1

    if isinstance(flips, tuple):
        return len(flips) == 2 and nat(flips[0]) and nat(flips[1]) and flips[0] <= flips[1]
    return nat(flips)


@dataclass(frozen=True)
class AttackerStrategy:
    kind: str = "none"
    rate: float = 1.0
    recipe: str | None = None
    slot: str | None = None
    # one flip count, or an inclusive [lo, hi] range drawn uniformly per injection
    flips: int | tuple[int, int] | None = None

    def __post_init__(self):
        if isinstance(self.flips, list):
            object.__setattr__(self, "flips", tuple(self.flips))
        if self.kind not in STRATEGY_NAMES.values():
            raise ConfigError(f"unknown attacker strategy {self.kind!r}")
        if not 0 < self.rate <= 1:
            raise ConfigError(f"attacker rate must lie in (0, 1], got {self.rate}")
        if self.kind == "structural_zero" and self.slot not in ("first", "second"):
            raise ConfigError("structural_zero needs slot 'first' or 'second'")
        if self.kind == "bitflip_inject" and not _valid_flips(self.flips):
            raise ConfigError("bitflip_inject needs flips >= 1 or a range [lo, hi] with 1 <= lo <= hi")
        if self.kind == "recipe_inject" and self.recipe not in ("xor", "xorsharp", "theorem2"):
            raise ConfigError("recipe_inject needs recipe 'xor', 'xorsharp' or 'theorem2'")

    @classmethod
    def from_json(cls, obj: Any) -> "AttackerStrategy":
        if obj is None:
            return cls()
        if isinstance(obj, str):
            obj = {"kind": obj}
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ConfigError(f"attacker must be an object with a 'kind', got {obj!r}")
        kind = STRATEGY_NAMES.get(str(obj["kind"]).replace("_", "").lower())
        if kind is None:
            raise ConfigError(f"unknown attacker strategy {obj['kind']!r}")
        extra = set(obj) - {"kind", "rate", "recipe", "slot", "flips"}
        if extra:
            raise ConfigError(f"unknown attacker fields {sorted(extra)}")
        try:
            rate = float(obj.get("rate", 1.0))
        except (TypeError, ValueError) as exc:
            raise ConfigError("attacker rate must be a number") from exc
        return cls(kind, rate, obj.get("recipe"), obj.get("slot"), obj.get("flips"))

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind, "rate": self.rate}
        for key in ("recipe", "slot", "flips"):
            if getattr(self, key) is not None:
                v = getattr(self, key)
                out[key] = list(v) if isinstance(v, tuple) else v
        return out

    def flip_count(self, rng: random.Random) -> int:
        if isinstance(self.flips, tuple):
            return rng.randint(*self.flips)
        return self.flips

    @property
    def label(self) -> str:
        flips = "..".join(map(str, self.flips)) if isinstance(self.flips, tuple) else self.flips
        arg = {"recipe_inject": self.recipe, "structural_zero": self.slot, "bitflip_inject": flips}.get(self.kind)
        head = self.kind if arg is None else f"{self.kind}({arg})"
        return head if self.kind == "none" else f"{head}@{self.rate:g}"


@dataclass(frozen=True)
class ActorSpec:
    id: str
    role: str
    script: tuple[str, ...] = ()


def _payload_domain(text: str) -> Nats | BitVecs:
    kind, _, width = text.partition(":")
    try:
        if kind == "nat":
            return Nats(int(width) if width else None)
        if kind == "bv" and width:
            return BitVecs(int(width))
    except ValueError:
        pass
    raise ConfigError(f"payload domain must be 'nat', 'nat:<bits>' or 'bv:<width>', got {text!r}")


@dataclass(frozen=True)
class Scenario:
    seed: SecretSeed = field(repr=False)
    lingo_spec: str | None
    actors: tuple[ActorSpec, ...]
    attacker: AttackerStrategy = AttackerStrategy()
    trials: int = 1
    max_steps: int = 1000
    payload: str | None = None

    def __post_init__(self):
        ids = [a.id for a in self.actors]
        if len(set(ids)) != len(ids):
            raise ConfigError("actor ids must be unique")
        if not ids:
            raise ConfigError("a scenario needs actors")
        for a in self.actors:
            if a.role not in ("client", "broker"):
                raise ConfigError(f"actor {a.id}: role must be client or broker")
            if a.role == "broker" and a.script:
                raise ConfigError(f"broker {a.id} takes no script")
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if isinstance(self.max_steps, bool) or not isinstance(self.max_steps, int) or self.max_steps < 1:
            raise ConfigError("maxSteps must be >= 1")

    @classmethod
    def from_json(cls, obj: Any) -> "Scenario":
        if not isinstance(obj, dict):
            raise ConfigError("scenario must be a JSON object")
        known = {"seed", "seedHex", "lingo", "lingoSpec", "actors", "attacker", "trials", "maxSteps", "payload"}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown scenario fields {sorted(extra)}")
        seed_hex = obj.get("seedHex", obj.get("seed"))
        if not isinstance(seed_hex, str):
            raise ConfigError("scenario needs a hex 'seed'")
        try:
            actors = tuple(
                ActorSpec(str(a["id"]), str(a.get("role", "client")), tuple(a.get("script", ())))
                for a in obj.get("actors", ())
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise ConfigError("each actor needs an 'id'") from exc
        return cls(
            seed=SecretSeed.from_hex(seed_hex),
            lingo_spec=obj.get("lingoSpec", obj.get("lingo")),
            actors=actors,
            attacker=AttackerStrategy.from_json(obj.get("attacker")),
            trials=obj.get("trials", 1),
            max_steps=obj.get("maxSteps", 1000),
            payload=obj.get("payload"),
        )

    @classmethod
    def load(cls, path) -> "Scenario":
        try:
            return cls.from_json(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read scenario {path}: {exc}") from exc

    def to_json(self) -> dict:
        """Scenario fields except the seed, which never leaves the process."""
        out: dict[str, Any] = {
            "lingoSpec": self.lingo_spec,
            "actors": [{"id": a.id, "role": a.role, "script": list(a.script)} for a in self.actors],
            "attacker": self.attacker.to_json(),
            "trials": self.trials,
            "maxSteps": self.max_steps,
        }
        if self.payload is not None:
            out["payload"] = self.payload
        return out

    def build_lingo(self) -> Lingo | None:
        if self.lingo_spec is None:
            return None
        return parse_lingo(self.lingo_spec, oids=[a.id for a in self.actors])

    def payload_domain(self, lingo: Lingo | None) -> Nats | BitVecs:
        if self.payload is not None:
            dom = _payload_domain(self.payload)
            if lingo is not None and dom != lingo.d1:
                raise ConfigError(f"payload domain {dom!r} differs from {lingo.id}'s input domain")
            return dom
        if lingo is None:
            return Nats()
        if not isinstance(lingo.d1, (Nats, BitVecs)):
            raise ConfigError(f"{lingo.id}: MQTT needs a natural or bit-vector input domain")
        return lingo.d1


# -- attacker -----------------------------------------------------------------


def _flip_bits(v: Value, flips: int, rng: random.Random) -> Value | None:
    match v:
        case BitStr(length=n, bits=x):
            return BitStr(n, x ^ _mask(n, flips, rng)) if flips <= n else None
        case BitVec(width=w, v=x):
            return BitVec(w, x ^ _mask(w, flips, rng)) if flips <= w else None
        case NatVal(v=x):
            w = max(x.bit_length(), 1)
            return NatVal(x ^ _mask(w, flips, rng)) if flips <= w else None
        case PairVal():
            w = _width(v)
            return _flip_positions(v, rng.sample(range(w), flips)) if flips <= w else None
    return None


def _width(v: Value) -> int:
    match v:
        case BitStr(length=n):
            return n
        case BitVec(width=w):
            return w
        case NatVal(v=x):
            return max(x.bit_length(), 1)
        case PairVal(first=a, second=b):
            return _width(a) + _width(b)
    return 1


def _flip_positions(v: Value, positions: list[int]) -> Value:
    if not positions:
        return v
    match v:
        case PairVal(first=a, second=b):
            wa = _width(a)
            return PairVal(
                _flip_positions(a, [p for p in positions if p < wa]),
                _flip_positions(b, [p - wa for p in positions if p >= wa]),
            )
    mask = sum(1 << p for p in positions)
    match v:
        case BitStr(length=n, bits=x):
            return BitStr(n, x ^ mask)
        case BitVec(width=w, v=x):
            return BitVec(w, x ^ mask)
        case NatVal(v=x):
            return NatVal(x ^ mask)
    return v


def _mask(width: int, flips: int, rng: random.Random) -> int:
    mask = 0
    for p in rng.sample(range(width), flips):
        mask |= 1 << p
    return mask


def _zero_slot(v: Value, slot: str) -> Value | None:
    if not isinstance(v, PairVal):
        return None
    keep = v.second if slot == "first" else v.first
    target = v.first if slot == "first" else v.second
    match target:
        case NatVal():
            zeroed = NatVal(0)
        case BitVec(width=w):
            zeroed = BitVec(w, 0)
        case _:
            return None
    # a zero in the kept slot would make the forgery trivially undecodable
    if keep == NatVal(0):
        keep = NatVal(1)
    return PairVal(zeroed, keep) if slot == "first" else PairVal(keep, zeroed)


class Attacker:
    """On-path adversary.  Its only entry points are ``observe`` and ``inject``."""

    def __init__(self, strategy: AttackerStrategy, lingo: Lingo | None, domain, rng: random.Random):
        self.strategy = strategy
        self.lingo = lingo
        self.domain = domain
        self.rng = rng
        self.recipe = _recipe_for(strategy, lingo)
        self.sent = 0

    def observe(self, msg: Message) -> Message | None:
        """See a legitimate wire message; maybe return a forgery to place behind it."""
        s = self.strategy
        if s.kind == "none":
            return None
        if self.rng.random() >= s.rate:
            return None
        payload = self._forge(msg.payload)
        if payload is None:
            return None
        return self.inject(msg, payload)

    def inject(self, observed: Message, payload: Value) -> Message:
        self.sent += 1
        return Message(observed.to, observed.sender, payload, observed.dialected, "attacker")

    def _forge(self, v: Value) -> Value | None:
        s = self.strategy
        if s.kind == "replay_last":
            return v
        if s.kind == "random_inject":
            return sample_value(self.domain, self.rng)
        if s.kind == "structural_zero":
            return _zero_slot(v, s.slot)
        if s.kind == "bitflip_inject":
            return _flip_bits(v, s.flip_count(self.rng), self.rng)
        if s.kind == "recipe_inject":
            try:
                return self.recipe.term(v, self.recipe.a0_sampler(self.rng.getrandbits(64)))
            except LingoError:
                return None
        return None


def _recipe_for(s: AttackerStrategy, lingo: Lingo | None):
    if s.kind != "recipe_inject":
        return None
    if lingo is None:
        raise ConfigError("recipe_inject needs a lingo")
    try:
        if s.recipe == "xor":
            recipe = xor_recipe(lingo.options["width"]) if lingo.rule == "xor" else None
        elif s.recipe == "xorsharp":
            base = lingo.parts[0] if lingo.rule == "sharp" else None
            recipe = xor_sharp_recipe(base.options["width"]) if base is not None and base.rule == "xor" else None
        else:
            recipe = theorem2_recipe(lingo, nonzero_scalar)
    except LingoError as exc:
        raise ConfigError(f"recipe {s.recipe} does not apply to {lingo.id}: {exc}") from exc
    if recipe is None or recipe.target != lingo.id:
        raise ConfigError(f"recipe {s.recipe} does not apply to {lingo.id}")
    return recipe


# -- running ------------------------------------------------------------------


@dataclass
class TrialResult:
    actors: dict[str, DialectActor]
    events: list[TraceEvent]
    quiescent: bool
    steps: int
    attacker_sent: int

    def count(self, ev: str, origin: str | None = None) -> int:
        return sum(1 for e in self.events if e.ev == ev and (origin is None or e.origin == origin))

    def counter_desyncs(self) -> int:
        ids = sorted(self.actors)
        bad = 0
        for a in ids:
            for b in ids:
                if a != b and self.actors[a].counters.sent(b) != self.actors[b].counters.received(a):
                    bad += 1
        return bad

    def inner_states(self) -> dict[str, Any]:
        return {i: self.actors[i].inner for i in sorted(self.actors)}

    def delivered(self) -> dict[str, list[Value]]:
        """Plain payloads handed to each inner actor, in order."""
        out: dict[str, list[Value]] = {i: [] for i in sorted(self.actors)}
        for e in self.events:
            if e.ev == "deliver":
                out[e.actor].append(e.plain)
        return out


def _initial_actors(s: Scenario, lingo: Lingo | None, seed: SecretSeed, codec: PayloadCodec) -> dict[str, DialectActor]:
    brokers = [a.id for a in s.actors if a.role == "broker"]
    default_broker = brokers[0] if len(brokers) == 1 else None
    actors = {}
    for spec in s.actors:
        if spec.role == "broker":
            inner = MqttBroker(spec.id, codec)
        else:
            script = tuple(parse_command(c, default_broker) for c in spec.script)
            inner = MqttClient(spec.id, codec, script)
        actors[spec.id] = DialectActor(spec.id, inner, lingo, seed if lingo is not None else None)
    return actors


def trial_seed(s: Scenario, t: int) -> SecretSeed:
    return s.seed.derive("trial", t)


def run_trial(s: Scenario, t: int, lingo: Lingo | None = None, *, dialected: bool = True) -> TrialResult:
    """Run trial ``t``.  ``dialected=False`` runs the same scripts with no lingo at all."""
    if dialected and lingo is None:
        lingo = s.build_lingo()
    if not dialected:
        codec_dom = s.payload_domain(lingo if lingo is not None else s.build_lingo())
        lingo = None
    else:
        codec_dom = s.payload_domain(lingo)
    codec = PayloadCodec(codec_dom)
    seed = trial_seed(s, t)
    attack_rng = random.Random(int.from_bytes(seed.derive("attacker").key, "big"))
    attacker = Attacker(s.attacker, lingo, lingo.d2 if lingo is not None else codec_dom, attack_rng)
    try:
        actors = _initial_actors(s, lingo, seed, codec)
    except LingoError as exc:
        raise ConfigError(f"scenario does not fit the payload domain: {exc}") from exc
    order = sorted(actors)
    channels: dict[tuple[str, str], deque[Message]] = {}
    keys: list[tuple[str, str]] = []
    # an actor whose step was a no-op stays idle until a message reaches it
    asleep: set[str] = set()
    events: list[TraceEvent] = []
    quiescent = False
    steps = 0
    for steps in range(1, s.max_steps + 1):
        moved = False
        for key in keys:
            q = channels[key]
            if not q:
                continue
            msg = q.popleft()
            if msg.to not in actors:
                raise ConfigError(f"message addressed to unknown actor {msg.to}")
            actors[msg.to] = rule_in(actors[msg.to], msg)
            asleep.discard(msg.to)
            n = actors[msg.to].counters.received(msg.sender)
            events.append(TraceEvent("in", msg.to, msg.sender, n, msg.payload, None, msg.origin))
            moved = True
        for aid in order:
            if aid in asleep:
                continue
            before = actors[aid]
            try:
                after, emitted, evs = step_traced(before)
            except LingoError as exc:
                raise ConfigError(f"actor {aid} failed: {exc}") from exc
            if after is before:
                asleep.add(aid)
                continue
            moved = True
            actors[aid] = after
            events.extend(evs)
            for w in emitted:
                q = channels.get((w.sender, w.to))
                if q is None:
                    q = channels[(w.sender, w.to)] = deque()
                    keys.append((w.sender, w.to))
                    keys.sort()
                q.append(w)
                forged = attacker.observe(w)
                if forged is not None:
                    q.append(forged)
        if not moved and not any(channels.values()):
            quiescent = True
            break
    return TrialResult(actors, events, quiescent, steps, attacker.sent)


@dataclass(frozen=True)
class Report:
    trials: int
    legit_sent: int
    legit_delivered: int
    attacker_sent: int
    attacker_accepted: int
    rejections: int
    counter_desyncs: int
    default_hits: int
    broker_non_peer_drops: int
    malformed_drops: int
    protocol_errors: int
    non_quiescent_trials: int
    traces: str | None = None

    @property
    def attacker_accept_rate(self) -> float:
        return self.attacker_accepted / max(self.attacker_sent, 1)

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "legitSent": self.legit_sent,
            "legitDelivered": self.legit_delivered,
            "attackerSent": self.attacker_sent,
            "attackerAccepted": self.attacker_accepted,
            "attackerAcceptRate": self.attacker_accept_rate,
            "rejections": self.rejections,
            "counterDesyncs": self.counter_desyncs,
            "defaultHits": self.default_hits,
            "brokerNonPeerDrops": self.broker_non_peer_drops,
            "malformedDrops": self.malformed_drops,
            "protocolErrors": self.protocol_errors,
            "nonQuiescentTrials": self.non_quiescent_trials,
            "traces": self.traces,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


@contextmanager
def _collector_paused():
    # trials build no reference cycles worth chasing, and the cyclic collector
    # rescanning the long-lived parameter caches nearly doubled the run time
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def run(s: Scenario, trace_dir=None) -> Report:
    """Run every trial and aggregate.  With ``trace_dir``, write one JSON-lines file per trial."""
    with _collector_paused():
        return _run(s, trace_dir)


def _run(s: Scenario, trace_dir) -> Report:
    lingo = s.build_lingo()
    totals = dict.fromkeys(
        ("sent", "deliv", "att_sent", "att_acc", "rej", "desync", "hits", "npd", "mal", "perr", "nq"), 0
    )
    if trace_dir is not None:
        Path(trace_dir).mkdir(parents=True, exist_ok=True)
    for t in range(s.trials):
        r = run_trial(s, t, lingo)
        totals["sent"] += r.count("out", "legit")
        totals["deliv"] += r.count("deliver", "legit")
        totals["att_sent"] += r.attacker_sent
        totals["att_acc"] += r.count("deliver", "attacker")
        totals["rej"] += r.count("reject")
        totals["desync"] += r.counter_desyncs()
        for a in r.actors.values():
            totals["hits"] += a.default_hits
            totals["perr"] += a.protocol_errors
            if isinstance(a.inner, MqttBroker):
                totals["npd"] += a.inner.non_peer_drops
                totals["mal"] += a.inner.malformed_drops
        totals["nq"] += not r.quiescent
        if trace_dir is not None:
            with open(Path(trace_dir) / f"trial-{t:05d}.jsonl", "w") as fh:
                for e in r.events:
                    fh.write(json.dumps(e.to_json(), sort_keys=True, separators=(",", ":")) + "\n")
    return Report(
        trials=s.trials,
        legit_sent=totals["sent"],
        legit_delivered=totals["deliv"],
        attacker_sent=totals["att_sent"],
        attacker_accepted=totals["att_acc"],
        rejections=totals["rej"],
        counter_desyncs=totals["desync"],
        default_hits=totals["hits"],
        broker_non_peer_drops=totals["npd"],
        malformed_drops=totals["mal"],
        protocol_errors=totals["perr"],
        non_quiescent_trials=totals["nq"],
        traces=None if trace_dir is None else str(trace_dir),
    )


def attack_table(scenarios) -> list[dict]:
    """One row per scenario, sorted by lingo spec then strategy label."""
    rows = []
    for s in scenarios:
        r = run(s)
        p, n = r.attacker_accept_rate, max(r.attacker_sent, 1)
        rows.append(
            {
                "lingoSpec": s.lingo_spec if s.lingo_spec is not None else "-",
                "strategy": s.attacker.label,
                "attackerSent": r.attacker_sent,
                "acceptRate": p,
                "ciHalfWidth": 1.96 * math.sqrt(p * (1 - p) / n),
            }
        )
    rows.sort(key=lambda row: (row["lingoSpec"], row["strategy"]))
    return rows


def format_table(rows: list[dict]) -> str:
    header = ("lingoSpec", "strategy", "sent", "acceptRate", "ci95")
    body = [
        (r["lingoSpec"], r["strategy"], str(r["attackerSent"]), f"{r['acceptRate']:.4f}", f"±{r['ciHalfWidth']:.4f}")
        for r in rows
    ]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(b, widths)) for b in body]
    return "\n".join(lines) + "\n"
