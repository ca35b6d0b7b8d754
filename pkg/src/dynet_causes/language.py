"""Concrete syntax for network specifications: lexer, parser and printer.

A specification file looks like::

    fields { port: {1, 2, 3, 4} }
    packets { s1 = {port: 1}  s3 = {port: 3} }
    queue [s1, s3]
    def S2' = port=3 . port<-4 ; S2
    init = C1 || S1 || S2 || C2

Policies use ``zero one f=v f<-v ~b p+q p.q p*`` with ``*`` binding tighter
than ``.`` which binds tighter than ``+``. In terms, the prefix ``;`` binds
tighter than ``(+)`` which binds tighter than ``||``; both binary operators
associate to the left.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import DynetError, SchemaError, SpecSyntaxError
from .netkat import (
    And,
    Assign,
    FieldSchema,
    Filter,
    Neg,
    One,
    Or,
    Packet,
    Policy,
    Predicate,
    Seq,
    Star,
    Test,
    Union,
    Value,
    Zero,
)
from .terms import Act, Bot, Choice, NetworkSpec, Par, Recv, Send, Term, Var

KEYWORDS = frozenset({"fields", "packets", "queue", "def", "init", "bot", "zero", "one"})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<number>[0-9]+)
  | (?P<sym>\(\+\)|\|\||<-|[{}\[\](),:=;?!+.*~])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "number", "sym" or "eof"
    text: str
    line: int
    column: int


def tokenize(text: str, error: type[DynetError] = SpecSyntaxError) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise error(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token], error: type[DynetError] = SpecSyntaxError):
        self.tokens = tokens
        self.pos = 0
        self.error = error

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at(self, text: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind in ("sym", "ident") and tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.next()

    def ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.text in KEYWORDS:
            self.fail(f"expected {what}")
        return self.next()

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise self.error(f"{message}, found {found}", tok.line, tok.column)


def _value(tok: Token) -> Value:
    return int(tok.text) if tok.kind == "number" else tok.text


class Syntax:
    """Parsing of policies, packets and terms against a fixed schema.

    Shared between the specification parser and the hazard/label parser.
    """

    def __init__(self, ts: TokenStream, schema: FieldSchema, packets: dict[str, Packet] | None = None):
        self.ts = ts
        self.schema = schema
        self.packets = packets if packets is not None else {}
        self.var_refs: list[tuple[str, Token]] = []

    def _schema_error(self, exc: SchemaError, tok: Token):
        raise self.ts.error(exc.message, tok.line, tok.column)

    # values and packets

    def value(self) -> tuple[Value, Token]:
        tok = self.ts.peek()
        if tok.kind not in ("ident", "number"):
            self.ts.fail("expected a value")
        self.ts.next()
        return _value(tok), tok

    def field_value(self, field_tok: Token, value: Value, value_tok: Token) -> None:
        if not self.schema.has_field(field_tok.text):
            raise self.ts.error(f"unknown field {field_tok.text!r}", field_tok.line, field_tok.column)
        try:
            self.schema.check_value(field_tok.text, value)
        except SchemaError as exc:
            self._schema_error(exc, value_tok)

    def packet_literal(self) -> Packet:
        start = self.ts.expect("{")
        values: dict[str, Value] = {}
        while not self.ts.at("}"):
            ftok = self.ts.ident("field name")
            self.ts.expect(":")
            value, vtok = self.value()
            self.field_value(ftok, value, vtok)
            if ftok.text in values:
                raise self.ts.error(f"field {ftok.text!r} given twice", ftok.line, ftok.column)
            values[ftok.text] = value
            if not self.ts.accept(","):
                break
        self.ts.expect("}")
        missing = [f for f in self.schema.names if f not in values]
        if missing:
            raise self.ts.error(f"packet literal misses fields {missing}", start.line, start.column)
        return Packet(tuple((f, values[f]) for f in self.schema.names))

    def packet_ref(self) -> Packet:
        if self.ts.at("{"):
            return self.packet_literal()
        tok = self.ts.ident("packet name")
        if tok.text not in self.packets:
            raise self.ts.error(f"unknown packet {tok.text!r}", tok.line, tok.column)
        return self.packets[tok.text]

    # policies

    def policy(self) -> Policy:
        left = self._pol_seq()
        while self.ts.accept("+"):
            left = _lift(Union, left, self._pol_seq())
        return left

    def _pol_seq(self) -> Policy:
        left = self._pol_star()
        while self.ts.accept("."):
            left = _lift(Seq, left, self._pol_star())
        return left

    def _pol_star(self) -> Policy:
        pol = self._pol_atom()
        while self.ts.accept("*"):
            pol = Star(pol)
        return pol

    def _pol_atom(self) -> Policy:
        ts = self.ts
        tok = ts.peek()
        if ts.accept("zero"):
            return Filter(Zero())
        if ts.accept("one"):
            return Filter(One())
        if ts.accept("~"):
            inner = self._pol_atom()
            if not isinstance(inner, Filter):
                raise ts.error("negation applies only to predicates", tok.line, tok.column)
            return Filter(Neg(inner.predicate))
        if ts.accept("("):
            pol = self.policy()
            ts.expect(")")
            return pol
        if tok.kind == "ident" and tok.text not in KEYWORDS and (ts.at("=", 1) or ts.at("<-", 1)):
            ts.next()
            op = ts.next().text
            value, vtok = self.value()
            self.field_value(tok, value, vtok)
            return Filter(Test(tok.text, value)) if op == "=" else Assign(tok.text, value)
        ts.fail("expected a policy")

    # terms

    def term(self) -> Term:
        left = self._choice()
        while self.ts.accept("||"):
            left = Par(left, self._choice())
        return left

    def _choice(self) -> Term:
        left = self._prefix()
        while self.ts.accept("(+)"):
            left = Choice(left, self._prefix())
        return left

    def _prefix(self) -> Term:
        ts = self.ts
        tok = ts.peek()
        if ts.accept("bot"):
            return Bot()
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            if ts.at("?", 1) or ts.at("!", 1):
                ts.next()
                kind = Recv if ts.next().text == "?" else Send
                pol = self.policy()
                ts.expect(";")
                return kind(tok.text, pol, self._prefix())
            if not (ts.at("=", 1) or ts.at("<-", 1)):
                ts.next()
                self.var_refs.append((tok.text, tok))
                return Var(tok.text)
        if tok.kind == "sym" and tok.text == "(":
            # either a parenthesised policy heading a prefix, or a nested term
            mark, refs = ts.pos, len(self.var_refs)
            try:
                pol = self.policy()
                ts.expect(";")
            except SpecSyntaxError as first:
                ts.pos = mark
                del self.var_refs[refs:]
                try:
                    ts.expect("(")
                    inner = self.term()
                    ts.expect(")")
                    return inner
                except SpecSyntaxError as second:
                    raise max(first, second, key=lambda e: (e.line or 0, e.column or 0)) from None
            return Act(pol, self._prefix())
        pol = self.policy()
        ts.expect(";")
        return Act(pol, self._prefix())


def _lift(op, left: Policy, right: Policy) -> Policy:
    if isinstance(left, Filter) and isinstance(right, Filter):
        pred = Or if op is Union else And
        return Filter(pred(left.predicate, right.predicate))
    return op(left, right)


# -- specification files ------------------------------------------------------


def parse_spec(text: str) -> NetworkSpec:
    """Parse a specification file. Guardedness is checked separately."""
    ts = TokenStream(tokenize(text))
    schema = FieldSchema()
    packets: dict[str, Packet] = {}
    queue: list[str] = []
    definitions: dict[str, Term] = {}
    init: Term | None = None
    seen_sections: set[str] = set()
    syntax = Syntax(ts, schema, packets)

    def once(tok: Token):
        if tok.text in seen_sections:
            raise SpecSyntaxError(f"duplicate {tok.text!r} section", tok.line, tok.column)
        seen_sections.add(tok.text)

    while ts.peek().kind != "eof":
        tok = ts.peek()
        if ts.accept("fields"):
            once(tok)
            if packets or definitions:
                raise SpecSyntaxError("'fields' must precede packets and definitions", tok.line, tok.column)
            schema = _fields_section(ts)
            syntax.schema = schema
        elif ts.accept("packets"):
            once(tok)
            ts.expect("{")
            while not ts.at("}"):
                name = ts.ident("packet name")
                if name.text in packets:
                    raise SpecSyntaxError(f"duplicate packet {name.text!r}", name.line, name.column)
                ts.expect("=")
                packets[name.text] = syntax.packet_literal()
                ts.accept(",")
            ts.expect("}")
        elif ts.accept("queue"):
            once(tok)
            ts.expect("[")
            while not ts.at("]"):
                name = ts.ident("packet name")
                if name.text not in packets:
                    raise SpecSyntaxError(f"unknown packet {name.text!r}", name.line, name.column)
                queue.append(name.text)
                if not ts.accept(","):
                    break
            ts.expect("]")
        elif ts.accept("def"):
            name = ts.ident("definition name")
            if name.text in definitions:
                raise SpecSyntaxError(f"duplicate definition {name.text!r}", name.line, name.column)
            ts.expect("=")
            definitions[name.text] = syntax.term()
        elif ts.accept("init"):
            once(tok)
            ts.expect("=")
            init = syntax.term()
        else:
            ts.fail("expected 'fields', 'packets', 'queue', 'def' or 'init'")

    if init is None:
        tok = ts.peek()
        raise SpecSyntaxError("missing 'init = <term>'", tok.line, tok.column)
    for name, tok in syntax.var_refs:
        if name not in definitions:
            raise SpecSyntaxError(f"unknown variable {name!r}", tok.line, tok.column)
    return NetworkSpec(schema, packets, tuple(queue), definitions, init)


def _fields_section(ts: TokenStream) -> FieldSchema:
    ts.expect("{")
    fields = []
    names = set()
    while not ts.at("}"):
        name = ts.ident("field name")
        if name.text in names:
            raise SpecSyntaxError(f"duplicate field {name.text!r}", name.line, name.column)
        names.add(name.text)
        ts.expect(":")
        ts.expect("{")
        values: list[Value] = []
        while True:
            tok = ts.peek()
            if tok.kind not in ("ident", "number"):
                ts.fail("expected a value")
            ts.next()
            value = _value(tok)
            if value in values:
                raise SpecSyntaxError(f"value {tok.text!r} listed twice", tok.line, tok.column)
            values.append(value)
            if not ts.accept(","):
                break
        ts.expect("}")
        fields.append((name.text, tuple(values)))
        ts.accept(",")
    ts.expect("}")
    return FieldSchema(tuple(fields))


def parse_term(text: str, spec: NetworkSpec) -> Term:
    """Parse a standalone term; variables must be defined in ``spec``."""
    ts = TokenStream(tokenize(text))
    syntax = Syntax(ts, spec.schema, spec.packets)
    term = syntax.term()
    if ts.peek().kind != "eof":
        ts.fail("unexpected trailing input")
    for name, tok in syntax.var_refs:
        if name not in spec.definitions:
            raise SpecSyntaxError(f"unknown variable {name!r}", tok.line, tok.column)
    return term


def parse_policy(text: str, schema: FieldSchema) -> Policy:
    ts = TokenStream(tokenize(text))
    pol = Syntax(ts, schema).policy()
    if ts.peek().kind != "eof":
        ts.fail("unexpected trailing input")
    return pol


# -- printing -----------------------------------------------------------------


def _paren(text: str, needed: bool) -> str:
    return f"({text})" if needed else text


def format_predicate(pred: Predicate, level: int = 0, compact: bool = False) -> str:
    sep = "" if compact else " "
    if isinstance(pred, Zero):
        return "zero"
    if isinstance(pred, One):
        return "one"
    if isinstance(pred, Test):
        return f"{pred.field}={pred.value}"
    if isinstance(pred, Neg):
        return "~" + format_predicate(pred.operand, 3, compact)
    if isinstance(pred, Or):
        text = f"{format_predicate(pred.left, 0, compact)}{sep}+{sep}{format_predicate(pred.right, 1, compact)}"
        return _paren(text, level > 0)
    if isinstance(pred, And):
        text = f"{format_predicate(pred.left, 1, compact)}{sep}.{sep}{format_predicate(pred.right, 2, compact)}"
        return _paren(text, level > 1)
    raise TypeError(f"not a predicate: {pred!r}")


def format_policy(pol: Policy, level: int = 0, compact: bool = False) -> str:
    """Render a policy; ``level`` is the binding strength of the context."""
    sep = "" if compact else " "
    if isinstance(pol, Filter):
        return format_predicate(pol.predicate, level, compact)
    if isinstance(pol, Assign):
        return f"{pol.field}<-{pol.value}"
    if isinstance(pol, Union):
        text = f"{format_policy(pol.left, 0, compact)}{sep}+{sep}{format_policy(pol.right, 1, compact)}"
        return _paren(text, level > 0)
    if isinstance(pol, Seq):
        text = f"{format_policy(pol.left, 1, compact)}{sep}.{sep}{format_policy(pol.right, 2, compact)}"
        return _paren(text, level > 1)
    if isinstance(pol, Star):
        return _paren(format_policy(pol.body, 3, compact) + "*", level > 2)
    raise TypeError(f"not a policy: {pol!r}")


def format_term(term: Term, level: int = 0) -> str:
    if isinstance(term, Bot):
        return "bot"
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Act):
        return f"{format_policy(term.policy)} ; {format_term(term.cont, 2)}"
    if isinstance(term, (Recv, Send)):
        mark = "?" if isinstance(term, Recv) else "!"
        return f"{term.channel} {mark} {format_policy(term.policy)} ; {format_term(term.cont, 2)}"
    if isinstance(term, Choice):
        return _paren(f"{format_term(term.left, 1)} (+) {format_term(term.right, 2)}", level > 1)
    if isinstance(term, Par):
        return _paren(f"{format_term(term.left, 0)} || {format_term(term.right, 1)}", level > 0)
    raise TypeError(f"not a term: {term!r}")


def term_key(term: Term) -> str:
    """Compact, fully determined rendering used in configuration keys.

    Operand order is kept as written; chains of the same operator along the
    left spine share one pair of parentheses.
    """
    if isinstance(term, Bot):
        return "bot"
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Act):
        return f"{format_policy(term.policy, compact=True)};{term_key(term.cont)}"
    if isinstance(term, (Recv, Send)):
        mark = "?" if isinstance(term, Recv) else "!"
        return f"{term.channel}{mark}{format_policy(term.policy, compact=True)};{term_key(term.cont)}"
    if isinstance(term, (Choice, Par)):
        op = "||" if isinstance(term, Par) else "(+)"
        items = []
        node = term
        while isinstance(node, type(term)):
            items.append(node.right)
            node = node.left
        items.append(node)
        return "(" + op.join(term_key(t) for t in reversed(items)) + ")"
    raise TypeError(f"not a term: {term!r}")


def format_value(value: Value) -> str:
    return str(value)


def format_packet(pkt: Packet) -> str:
    return "{" + ", ".join(f"{f}: {v}" for f, v in pkt.values) + "}"


def pretty_print(spec: NetworkSpec) -> str:
    lines = []
    if spec.schema.fields:
        lines.append("fields {")
        for name, dom in spec.schema.fields:
            lines.append(f"  {name}: {{{', '.join(map(format_value, dom))}}}")
        lines.append("}")
    if spec.packets:
        lines.append("packets {")
        for name, pkt in spec.packets.items():
            lines.append(f"  {name} = {format_packet(pkt)}")
        lines.append("}")
    if spec.queue:
        lines.append(f"queue [{', '.join(spec.queue)}]")
    if lines:
        lines.append("")
    for name, body in spec.definitions.items():
        lines.append(f"def {name} = {format_term(body)}")
    lines.append(f"init = {format_term(spec.init)}")
    return "\n".join(lines) + "\n"


def load_spec(text: str) -> NetworkSpec:
    """Parse and validate (including guardedness)."""
    from .terms import validate_guardedness

    spec = parse_spec(text)
    validate_guardedness(spec)
    return spec
