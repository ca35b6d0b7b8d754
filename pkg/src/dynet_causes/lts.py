"""Operational semantics and LTS construction.

A configuration is a term plus two global packet queues. The rules:

process      ``N ; D`` with input ``σ::H`` emits ``(σ,σ')`` for every ``σ' ∈ N(σ)``,
             moving to ``D`` with ``σ'`` pushed on the head of the output queue.
receive      ``x?N ; D`` emits the free receive ``x?N``.
send         ``x!N ; D`` emits the free send ``x!N``.
choice       a choice has the transitions of either branch; the other is dropped.
interleave   parallel components interleave.
communicate  a send ``x!N`` synchronises with receives ``x?N'`` (``N'`` matching ``N``)
             in other parallel components, giving ``⟨x,N⟩``. In ``multi`` arity any
             non-empty set of ready receivers joins, one per component; ``binary``
             arity allows exactly one.
unfold       a variable behaves as its definition.
inaction     ``bot`` has no transitions.

Free sends and receives stay observable even when a partner is ready.
"""

from __future__ import annotations

import json
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .errors import DynetError, StateBudgetExceeded
from .labels import (
    FreeRecv,
    FreeSend,
    Label,
    Proc,
    Sync,
    label_from_json,
    label_to_json,
    packet_text,
    render_label,
)
from .language import format_term, parse_term, term_key
from .netkat import Packet, Policy, eval_policy, policies_equivalent
from .terms import Act, Bot, Choice, NetworkSpec, Par, Recv, Send, Term, Var

DEFAULT_MAX_STATES = 100_000
SYNC_MATCH_MODES = ("syntactic", "semantic")
SYNC_ARITIES = ("multi", "binary")

# rank used when ordering successors: process, receive, send, communicate
_RULE_RANK = {Proc: 1, FreeRecv: 2, FreeSend: 3, Sync: 6}


@dataclass(frozen=True)
class Configuration:
    term: Term
    inq: tuple[Packet, ...] = ()
    outq: tuple[Packet, ...] = ()  # most recent first


def canonical_key(config: Configuration, spec: NetworkSpec) -> str:
    inq = ",".join(packet_text(p, spec) for p in config.inq)
    outq = ",".join(packet_text(p, spec) for p in config.outq)
    return f"{term_key(config.term)} | in:[{inq}] | out:[{outq}]"


@dataclass
class LTS:
    spec: NetworkSpec
    states: list[Configuration]
    transitions: list[tuple[int, Label, int]]
    initial: int = 0
    _succ: dict[int, list[tuple[Label, int]]] = field(default=None, repr=False, compare=False)

    def successors(self, state: int) -> list[tuple[Label, int]]:
        if self._succ is None:
            self._succ = {i: [] for i in range(len(self.states))}
            for src, label, dst in self.transitions:
                self._succ[src].append((label, dst))
        return self._succ[state]

    def alphabet(self) -> list[Label]:
        labels = {label for _, label, _ in self.transitions}
        return sorted(labels, key=lambda l: render_label(l, self.spec))

    def key(self, state: int) -> str:
        return canonical_key(self.states[state], self.spec)

    def replays(self, word: Iterable[Label]) -> set[int]:
        """States reachable from the initial state by reading ``word``."""
        current = {self.initial}
        for label in word:
            current = {dst for s in current for l, dst in self.successors(s) if l == label}
            if not current:
                break
        return current


class Semantics:
    """Successor computation for one specification and one set of options."""

    def __init__(self, spec: NetworkSpec, sync_match: str = "syntactic", sync_arity: str = "multi"):
        if sync_match not in SYNC_MATCH_MODES:
            raise ValueError(f"sync_match must be one of {SYNC_MATCH_MODES}")
        if sync_arity not in SYNC_ARITIES:
            raise ValueError(f"sync_arity must be one of {SYNC_ARITIES}")
        self.spec = spec
        self.sync_match = sync_match
        self.sync_arity = sync_arity
        self._moves: dict[Term, frozenset] = {}
        self._receives: dict[tuple[Term, str, Policy], frozenset] = {}

    def matches(self, sent: Policy, received: Policy) -> bool:
        if self.sync_match == "syntactic" or sent == received:
            return sent == received
        return policies_equivalent(sent, received, self.spec.schema)

    def _body(self, var: Var) -> Term:
        try:
            return self.spec.definitions[var.name]
        except KeyError:
            raise DynetError(f"unbound variable {var.name!r}") from None

    def moves(self, term: Term) -> frozenset:
        """Local moves ``(kind, channel, policy, target, receivers)``.

        ``kind`` is ``proc``, ``recv``, ``send`` or ``sync``; a ``send`` move
        is a free send and a ``sync`` move has already gathered receivers.
        Queues are not touched here.
        """
        cached = self._moves.get(term)
        if cached is None:
            cached = frozenset(self._compute_moves(term))
            self._moves[term] = cached
        return cached

    def _compute_moves(self, term: Term):
        if isinstance(term, Bot):
            return
        if isinstance(term, Act):
            yield ("proc", None, term.policy, term.cont, 0)
        elif isinstance(term, Recv):
            yield ("recv", term.channel, term.policy, term.cont, 0)
        elif isinstance(term, Send):
            yield ("send", term.channel, term.policy, term.cont, 0)
        elif isinstance(term, Choice):
            yield from self.moves(term.left)
            yield from self.moves(term.right)
        elif isinstance(term, Var):
            yield from self.moves(self._body(term))
        elif isinstance(term, Par):
            left, right = term.left, term.right
            lmoves, rmoves = self.moves(left), self.moves(right)
            for kind, chan, pol, tgt, n in lmoves:
                yield (kind, chan, pol, Par(tgt, right), n)
            for kind, chan, pol, tgt, n in rmoves:
                yield (kind, chan, pol, Par(left, tgt), n)
            for senders, other, sender_left in ((lmoves, right, True), (rmoves, left, False)):
                for kind, chan, pol, tgt, n in senders:
                    if kind not in ("send", "sync"):
                        continue
                    if self.sync_arity == "binary" and n > 0:
                        continue
                    for rtgt, k in self.receivers(other, chan, pol):
                        target = Par(tgt, rtgt) if sender_left else Par(rtgt, tgt)
                        yield ("sync", chan, pol, target, n + k)
        else:
            raise TypeError(f"not a term: {term!r}")

    def receivers(self, term: Term, chan: str, pol: Policy) -> frozenset:
        """Ways ``term`` can take part in a communication as receiver(s).

        Returns pairs ``(target, count)`` with ``count >= 1`` receivers, each
        in a distinct parallel component.
        """
        key = (term, chan, pol)
        cached = self._receives.get(key)
        if cached is None:
            cached = frozenset(self._compute_receivers(term, chan, pol))
            self._receives[key] = cached
        return cached

    def _compute_receivers(self, term: Term, chan: str, pol: Policy):
        if isinstance(term, Recv):
            if term.channel == chan and self.matches(pol, term.policy):
                yield (term.cont, 1)
        elif isinstance(term, Choice):
            yield from self.receivers(term.left, chan, pol)
            yield from self.receivers(term.right, chan, pol)
        elif isinstance(term, Var):
            yield from self.receivers(self._body(term), chan, pol)
        elif isinstance(term, Par):
            left = self.receivers(term.left, chan, pol)
            right = self.receivers(term.right, chan, pol)
            for tgt, k in left:
                yield (Par(tgt, term.right), k)
            for tgt, k in right:
                yield (Par(term.left, tgt), k)
            if self.sync_arity == "multi":
                for ltgt, k in left:
                    for rtgt, m in right:
                        yield (Par(ltgt, rtgt), k + m)

    def step(self, config: Configuration) -> list[tuple[Label, Configuration]]:
        out: set[tuple[Label, Configuration]] = set()
        for kind, chan, pol, tgt, _ in self.moves(config.term):
            if kind == "proc":
                if not config.inq:
                    continue
                head, rest = config.inq[0], config.inq[1:]
                for processed in eval_policy(pol, head):
                    out.add((Proc(head, processed), Configuration(tgt, rest, (processed,) + config.outq)))
            elif kind == "recv":
                out.add((FreeRecv(chan, pol), Configuration(tgt, config.inq, config.outq)))
            elif kind == "send":
                out.add((FreeSend(chan, pol), Configuration(tgt, config.inq, config.outq)))
            else:
                out.add((Sync(chan, pol), Configuration(tgt, config.inq, config.outq)))
        return sorted(out, key=self._order)

    def _order(self, item):
        label, config = item
        return (_RULE_RANK[type(label)], render_label(label, self.spec), canonical_key(config, self.spec))

    def initial(self) -> Configuration:
        return Configuration(self.spec.init, self.spec.initial_queue, ())


def step(
    config: Configuration,
    spec: NetworkSpec,
    sync_match: str = "syntactic",
    sync_arity: str = "multi",
) -> list[tuple[Label, Configuration]]:
    return Semantics(spec, sync_match, sync_arity).step(config)


def default_max_states() -> int:
    env = os.environ.get("DYNET_CAUSES_MAX_STATES")
    return int(env) if env else DEFAULT_MAX_STATES


def build_lts(
    spec: NetworkSpec,
    max_states: int | None = None,
    sync_match: str = "syntactic",
    sync_arity: str = "multi",
) -> LTS:
    """Breadth-first exploration from ``(init, queue, [])``.

    States are numbered in discovery order; successors are visited in the
    order produced by :meth:`Semantics.step`, so numbering is deterministic.
    """
    if max_states is None:
        max_states = default_max_states()
    sem = Semantics(spec, sync_match, sync_arity)
    start = sem.initial()
    index = {start: 0}
    states = [start]
    transitions: list[tuple[int, Label, int]] = []
    queue = deque([0])
    while queue:
        src = queue.popleft()
        for label, config in sem.step(states[src]):
            dst = index.get(config)
            if dst is None:
                if len(states) >= max_states:
                    raise StateBudgetExceeded(max_states, len(queue) + 1)
                dst = len(states)
                index[config] = dst
                states.append(config)
                queue.append(dst)
            transitions.append((src, label, dst))
    return LTS(spec, states, transitions)


# -- export -------------------------------------------------------------------


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def lts_to_dot(lts: LTS) -> str:
    lines = ["digraph lts {", "  rankdir=LR;", '  node [shape=box, fontname="monospace"];']
    for i in range(len(lts.states)):
        shape = ", peripheries=2" if i == lts.initial else ""
        lines.append(f'  n{i} [label="n{i}: {_dot_escape(lts.key(i))}"{shape}];')
    for src, label, dst in lts.transitions:
        lines.append(f'  n{src} -> n{dst} [label="{_dot_escape(render_label(label, lts.spec))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def lts_to_json(lts: LTS) -> str:
    doc = {
        "states": [
            {
                "id": i,
                "term": format_term(c.term),
                "in": [p.as_dict() for p in c.inq],
                "out": [p.as_dict() for p in c.outq],
            }
            for i, c in enumerate(lts.states)
        ],
        "initial": lts.initial,
        "transitions": [
            {"from": src, "label": label_to_json(label, lts.spec), "to": dst}
            for src, label, dst in lts.transitions
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def lts_to_text(lts: LTS) -> str:
    lines = [f"states: {len(lts.states)}", f"transitions: {len(lts.transitions)}", f"initial: n{lts.initial}"]
    for i in range(len(lts.states)):
        lines.append(f"n{i}: {lts.key(i)}")
        for label, dst in lts.successors(i):
            lines.append(f"  --{render_label(label, lts.spec)}--> n{dst}")
    return "\n".join(lines) + "\n"


def export_lts(lts: LTS, fmt: str) -> str:
    if fmt == "dot":
        return lts_to_dot(lts)
    if fmt == "json":
        return lts_to_json(lts)
    if fmt == "text":
        return lts_to_text(lts)
    raise ValueError(f"unknown LTS format {fmt!r}")


def lts_from_json(text: str, spec: NetworkSpec) -> LTS:
    from .labels import _packet_from_json

    doc = json.loads(text)
    states = [None] * len(doc["states"])
    for entry in doc["states"]:
        states[entry["id"]] = Configuration(
            parse_term(entry["term"], spec),
            tuple(_packet_from_json(p, spec) for p in entry["in"]),
            tuple(_packet_from_json(p, spec) for p in entry["out"]),
        )
    transitions = [
        (t["from"], label_from_json(t["label"], spec), t["to"]) for t in doc["transitions"]
    ]
    return LTS(spec, states, transitions, doc["initial"])
