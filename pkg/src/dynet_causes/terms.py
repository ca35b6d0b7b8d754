"""DyNetKAT process terms and whole network specifications."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union as _Union

from .errors import GuardednessError
from .netkat import FieldSchema, Packet, Policy


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Act:
    """``N ; D``: process the head packet of the input queue with ``N``."""

    policy: Policy
    cont: "Term"


@dataclass(frozen=True)
class Recv:
    channel: str
    policy: Policy
    cont: "Term"


@dataclass(frozen=True)
class Send:
    channel: str
    policy: Policy
    cont: "Term"


@dataclass(frozen=True)
class Choice:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Par:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Var:
    name: str


Term = _Union[Bot, Act, Recv, Send, Choice, Par, Var]
PREFIXES = (Act, Recv, Send)


def par_of(*terms: Term) -> Term:
    """Left-associated parallel composition of one or more terms."""
    out = terms[0]
    for t in terms[1:]:
        out = Par(out, t)
    return out


def choice_of(*terms: Term) -> Term:
    out = terms[0]
    for t in terms[1:]:
        out = Choice(out, t)
    return out


def par_components(term: Term) -> list[Term]:
    """Flatten nested ``Par`` nodes into their sequential leaves."""
    if isinstance(term, Par):
        return par_components(term.left) + par_components(term.right)
    return [term]


def subterms(term: Term) -> Iterator[Term]:
    yield term
    if isinstance(term, PREFIXES):
        yield from subterms(term.cont)
    elif isinstance(term, (Choice, Par)):
        yield from subterms(term.left)
        yield from subterms(term.right)


def free_vars(term: Term) -> set[str]:
    return {t.name for t in subterms(term) if isinstance(t, Var)}


def channels_of(term: Term) -> set[str]:
    return {t.channel for t in subterms(term) if isinstance(t, (Recv, Send))}


def unguarded_vars(term: Term) -> list[str]:
    """Variables reachable from ``term`` through Choice and Par only."""
    if isinstance(term, Var):
        return [term.name]
    if isinstance(term, (Choice, Par)):
        return unguarded_vars(term.left) + unguarded_vars(term.right)
    return []


@dataclass(frozen=True)
class NetworkSpec:
    schema: FieldSchema
    packets: dict[str, Packet] = field(default_factory=dict)
    queue: tuple[str, ...] = ()
    definitions: dict[str, Term] = field(default_factory=dict)
    init: Term = Bot()

    @property
    def initial_queue(self) -> tuple[Packet, ...]:
        return tuple(self.packets[name] for name in self.queue)

    @property
    def channels(self) -> tuple[str, ...]:
        found: set[str] = channels_of(self.init)
        for body in self.definitions.values():
            found |= channels_of(body)
        return tuple(sorted(found))

    def packet_name(self, pkt: Packet) -> str | None:
        for name, declared in self.packets.items():
            if declared == pkt:
                return name
        return None


def validate_guardedness(spec: NetworkSpec) -> None:
    """Raise :class:`GuardednessError` naming a cycle of unguarded recursion.

    An edge X -> Y exists when Y occurs in the body of X outside any action
    prefix. A spec is guarded iff this graph is acyclic.
    """
    graph = {name: unguarded_vars(body) for name, body in spec.definitions.items()}
    state: dict[str, int] = {}  # 1 = on stack, 2 = finished
    stack: list[str] = []

    def visit(name: str) -> None:
        state[name] = 1
        stack.append(name)
        for succ in graph.get(name, ()):
            if state.get(succ) == 1:
                raise GuardednessError(stack[stack.index(succ):])
            if succ not in state:
                visit(succ)
        stack.pop()
        state[name] = 2

    for name in graph:
        if name not in state:
            visit(name)
