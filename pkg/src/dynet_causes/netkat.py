"""Packets over finite field domains and the NetKAT (without ``dup``) fragment.

Predicates and policies are separate ASTs: a predicate only enters a policy
through :class:`Filter`, so negation can never be applied to an assignment.
A policy denotes a function from one packet to a set of packets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Union as _Union

from .errors import CapacityError, SchemaError

Value = _Union[int, str]

DEFAULT_EQUIVALENCE_CAP = 10**6


@dataclass(frozen=True)
class FieldSchema:
    """Ordered field names, each with a finite, explicitly enumerated domain."""

    fields: tuple[tuple[str, tuple[Value, ...]], ...] = ()

    def __post_init__(self):
        seen = set()
        for name, domain in self.fields:
            if name in seen:
                raise SchemaError(f"duplicate field {name!r}")
            seen.add(name)
            if not domain:
                raise SchemaError(f"field {name!r} has an empty domain")
            if len(set(domain)) != len(domain):
                raise SchemaError(f"field {name!r} lists a value twice")

    @classmethod
    def of(cls, **domains) -> "FieldSchema":
        return cls(tuple((name, tuple(vals)) for name, vals in domains.items()))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.fields)

    def domain(self, field: str) -> tuple[Value, ...]:
        for name, dom in self.fields:
            if name == field:
                return dom
        raise SchemaError(f"unknown field {field!r}")

    def has_field(self, field: str) -> bool:
        return any(name == field for name, _ in self.fields)

    @property
    def size(self) -> int:
        """Number of distinct packets."""
        return math.prod(len(dom) for _, dom in self.fields)

    def packets(self) -> Iterator["Packet"]:
        """Every packet of the space, in schema order."""
        names = self.names
        for combo in itertools.product(*(dom for _, dom in self.fields)):
            yield Packet(tuple(zip(names, combo)))

    def packet(self, **values) -> "Packet":
        pkt = Packet(tuple((name, values[name]) for name in self.names if name in values))
        self.check_packet(pkt)
        return pkt

    def check_packet(self, pkt: "Packet") -> None:
        if tuple(f for f, _ in pkt.values) != self.names:
            raise SchemaError(f"packet {pkt} does not list exactly the fields {list(self.names)}")
        for field, value in pkt.values:
            if value not in self.domain(field):
                raise SchemaError(f"value {value!r} outside the domain of field {field!r}")

    def check_value(self, field: str, value: Value) -> None:
        if value not in self.domain(field):
            raise SchemaError(f"value {value!r} outside the domain of field {field!r}")

    def sort_key(self, pkt: "Packet") -> tuple[int, ...]:
        return tuple(self.domain(f).index(v) for f, v in pkt.values)

    def check_predicate(self, pred: "Predicate") -> None:
        if isinstance(pred, Test):
            self.check_value(pred.field, pred.value)
        elif isinstance(pred, Neg):
            self.check_predicate(pred.operand)
        elif isinstance(pred, (Or, And)):
            self.check_predicate(pred.left)
            self.check_predicate(pred.right)

    def check_policy(self, pol: "Policy") -> None:
        if isinstance(pol, Filter):
            self.check_predicate(pol.predicate)
        elif isinstance(pol, Assign):
            self.check_value(pol.field, pol.value)
        elif isinstance(pol, (Union, Seq)):
            self.check_policy(pol.left)
            self.check_policy(pol.right)
        elif isinstance(pol, Star):
            self.check_policy(pol.body)


@dataclass(frozen=True)
class Packet:
    """A total assignment of values to the schema's fields, in schema order."""

    values: tuple[tuple[str, Value], ...]

    def __getitem__(self, field: str) -> Value:
        for name, value in self.values:
            if name == field:
                return value
        raise SchemaError(f"packet has no field {field!r}")

    def has_field(self, field: str) -> bool:
        return any(name == field for name, _ in self.values)

    def with_value(self, field: str, value: Value) -> "Packet":
        if not self.has_field(field):
            raise SchemaError(f"packet has no field {field!r}")
        return Packet(tuple((n, value if n == field else v) for n, v in self.values))

    def as_dict(self) -> dict[str, Value]:
        return dict(self.values)

    def __str__(self) -> str:
        return "{" + ",".join(f"{f}:{v}" for f, v in self.values) + "}"


# -- predicates ---------------------------------------------------------------


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Test:
    field: str
    value: Value

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class Neg:
    operand: "Predicate"


@dataclass(frozen=True)
class Or:
    left: "Predicate"
    right: "Predicate"


@dataclass(frozen=True)
class And:
    left: "Predicate"
    right: "Predicate"


Predicate = _Union[Zero, One, Test, Neg, Or, And]


# -- policies -----------------------------------------------------------------


@dataclass(frozen=True)
class Filter:
    predicate: Predicate


@dataclass(frozen=True)
class Assign:
    field: str
    value: Value


@dataclass(frozen=True)
class Union:
    left: "Policy"
    right: "Policy"


@dataclass(frozen=True)
class Seq:
    left: "Policy"
    right: "Policy"


@dataclass(frozen=True)
class Star:
    body: "Policy"


Policy = _Union[Filter, Assign, Union, Seq, Star]

DROP = Filter(Zero())
SKIP = Filter(One())


def normalize_policy(pol: Policy) -> Policy:
    """Fold unions and sequences of two filters into a single filter.

    This is the shape the parser produces, so printing and re-parsing a
    normalized policy gives back the same tree.
    """
    if isinstance(pol, (Union, Seq)):
        left, right = normalize_policy(pol.left), normalize_policy(pol.right)
        if isinstance(left, Filter) and isinstance(right, Filter):
            op = Or if isinstance(pol, Union) else And
            return Filter(op(left.predicate, right.predicate))
        return type(pol)(left, right)
    if isinstance(pol, Star):
        return Star(normalize_policy(pol.body))
    return pol


def eval_predicate(pred: Predicate, pkt: Packet) -> bool:
    if isinstance(pred, Zero):
        return False
    if isinstance(pred, One):
        return True
    if isinstance(pred, Test):
        return pkt[pred.field] == pred.value
    if isinstance(pred, Neg):
        return not eval_predicate(pred.operand, pkt)
    if isinstance(pred, Or):
        return eval_predicate(pred.left, pkt) or eval_predicate(pred.right, pkt)
    if isinstance(pred, And):
        return eval_predicate(pred.left, pkt) and eval_predicate(pred.right, pkt)
    raise TypeError(f"not a predicate: {pred!r}")


def eval_policy(pol: Policy, pkt: Packet) -> frozenset[Packet]:
    """The set of packets ``pol`` produces from ``pkt``."""
    return _eval(pol, pkt)


@lru_cache(maxsize=1 << 16)
def _eval(pol: Policy, pkt: Packet) -> frozenset[Packet]:
    if isinstance(pol, Filter):
        return frozenset((pkt,)) if eval_predicate(pol.predicate, pkt) else frozenset()
    if isinstance(pol, Assign):
        return frozenset((pkt.with_value(pol.field, pol.value),))
    if isinstance(pol, Union):
        return _eval(pol.left, pkt) | _eval(pol.right, pkt)
    if isinstance(pol, Seq):
        out: set[Packet] = set()
        for mid in _eval(pol.left, pkt):
            out |= _eval(pol.right, mid)
        return frozenset(out)
    if isinstance(pol, Star):
        # saturation; terminates because the packet space is finite
        seen = {pkt}
        frontier = [pkt]
        while frontier:
            nxt = []
            for p in frontier:
                for q in _eval(pol.body, p):
                    if q not in seen:
                        seen.add(q)
                        nxt.append(q)
            frontier = nxt
        return frozenset(seen)
    raise TypeError(f"not a policy: {pol!r}")


def policies_equivalent(
    p: Policy, q: Policy, schema: FieldSchema, cap: int = DEFAULT_EQUIVALENCE_CAP
) -> bool:
    """Decide equivalence by evaluating both policies on every packet."""
    if schema.size > cap:
        raise CapacityError(f"packet space of {schema.size} exceeds the cap of {cap}")
    return all(_eval(p, pkt) == _eval(q, pkt) for pkt in schema.packets())
