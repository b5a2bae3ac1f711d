"""Composable lingos, protocol dialects over a toy MQTT, and an on-path attack simulator."""

from .compose import HorizontalSpec, default_output, functional, horizontal, throw_biased, uses_default
from .core import (
    Lingo,
    apply_f,
    apply_g,
    check_compliance,
    dnc_lingo,
    domain_contains,
    reverse_dnc_lingo,
    xor_bseq_lingo,
    xor_lingo,
)
from .dialect import DialectActor, Message, TraceEvent, rule_deliver, rule_in, rule_out, step
from .errors import (
    ArgError,
    CompositionError,
    ConfigError,
    DomainError,
    LingoError,
    ProtocolError,
    RoutingError,
)
from .mqtt import MqttBroker, MqttClient, PayloadCodec, broker_step, client_step
from .params import PeerCounters, SecretSeed, bump_recv, bump_send, horizontal_param, param_for, prf
from .sim import AttackerStrategy, Report, Scenario, attack_table, run, run_trial
from .specs import parse_lingo, parse_param, parse_value
from .transform import (
    AuthLingo,
    MalleabilityReport,
    Recipe,
    auth_check,
    authenticating,
    flip_acceptance,
    involution_from_seed,
    sharp,
    theorem2_recipe,
    verify_malleability,
    xor_recipe,
    xor_sharp_recipe,
)
from .values import (
    AuthTriple,
    BitStr,
    BitStrs,
    BitVec,
    BitVecs,
    Involution,
    NatPairs,
    NatVal,
    Nats,
    PairVal,
    ParamPair,
    ProductOf,
    Scalar,
    Tagged,
    UnionOf,
)
