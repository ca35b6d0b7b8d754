"""Transition labels and their textual form.

The same syntax is used in DOT/JSON exports, hazard atoms and the
``check-word`` command::

    proc(s1,s2)   send(X,one)   recv(X,one)   sync(X,one)

Packets print by declared name when one matches, else as ``{f:v,...}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union as _Union

from .errors import DynetError, HazardSyntaxError
from .language import Syntax, TokenStream, format_policy, tokenize
from .netkat import Packet, Policy
from .terms import NetworkSpec


@dataclass(frozen=True)
class Proc:
    src: Packet
    dst: Packet


@dataclass(frozen=True)
class FreeSend:
    channel: str
    policy: Policy


@dataclass(frozen=True)
class FreeRecv:
    channel: str
    policy: Policy


@dataclass(frozen=True)
class Sync:
    channel: str
    policy: Policy


Label = _Union[Proc, FreeSend, FreeRecv, Sync]

KIND = {Proc: "proc", FreeSend: "send", FreeRecv: "recv", Sync: "sync"}
_CHANNEL_KINDS = {"send": FreeSend, "recv": FreeRecv, "sync": Sync}


def packet_text(pkt: Packet, spec: NetworkSpec) -> str:
    name = spec.packet_name(pkt)
    return name if name is not None else str(pkt)


def render_label(label: Label, spec: NetworkSpec) -> str:
    if isinstance(label, Proc):
        return f"proc({packet_text(label.src, spec)},{packet_text(label.dst, spec)})"
    return f"{KIND[type(label)]}({label.channel},{format_policy(label.policy, compact=True)})"


def label_atom(syntax: Syntax, spec: NetworkSpec) -> Label:
    """Parse one label from ``syntax``'s token stream."""
    ts = syntax.ts
    tok = ts.peek()
    kind = tok.text if tok.kind == "ident" else None
    if kind == "proc":
        ts.next()
        ts.expect("(")
        src = syntax.packet_ref()
        ts.expect(",")
        dst = syntax.packet_ref()
        ts.expect(")")
        return Proc(src, dst)
    if kind in _CHANNEL_KINDS:
        ts.next()
        ts.expect("(")
        chan = ts.ident("channel name")
        if chan.text not in spec.channels:
            raise ts.error(f"unknown channel {chan.text!r}", chan.line, chan.column)
        ts.expect(",")
        pol = syntax.policy()
        ts.expect(")")
        return _CHANNEL_KINDS[kind](chan.text, pol)
    ts.fail("expected a label (proc, send, recv or sync)")


def parse_label(text: str, spec: NetworkSpec, error: type[DynetError] = HazardSyntaxError) -> Label:
    ts = TokenStream(tokenize(text, error), error)
    label = label_atom(Syntax(ts, spec.schema, spec.packets), spec)
    if ts.peek().kind != "eof":
        ts.fail("unexpected trailing input")
    return label


def parse_word(text: str, spec: NetworkSpec, error: type[DynetError] = HazardSyntaxError) -> list[Label]:
    """Parse whitespace- or comma-separated labels; empty text is the empty word."""
    ts = TokenStream(tokenize(text, error), error)
    syntax = Syntax(ts, spec.schema, spec.packets)
    word = []
    while ts.peek().kind != "eof":
        word.append(label_atom(syntax, spec))
        ts.accept(",")
    return word


def label_to_json(label: Label, spec: NetworkSpec) -> dict:
    if isinstance(label, Proc):
        return {"kind": "proc", "src": label.src.as_dict(), "dst": label.dst.as_dict()}
    return {
        "kind": KIND[type(label)],
        "channel": label.channel,
        "policy": format_policy(label.policy, compact=True),
    }


def label_from_json(obj: dict, spec: NetworkSpec) -> Label:
    from .language import parse_policy

    kind = obj["kind"]
    if kind == "proc":
        return Proc(_packet_from_json(obj["src"], spec), _packet_from_json(obj["dst"], spec))
    return _CHANNEL_KINDS[kind](obj["channel"], parse_policy(obj["policy"], spec.schema))


def _packet_from_json(obj: dict, spec: NetworkSpec) -> Packet:
    pkt = Packet(tuple((f, obj[f]) for f in spec.schema.names))
    spec.schema.check_packet(pkt)
    return pkt
