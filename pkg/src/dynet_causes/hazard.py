"""Hazards: regular expressions over transition labels.

Syntax::

    e ::= 0 | 1 | atom | !atom | any | e ; e | e + e | e* | (e)

``!atom`` matches any single label other than ``atom`` and ``any`` matches
any single label; neither is a language complement.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence, Union as _Union

from .errors import HazardSyntaxError
from .labels import Label, label_atom, render_label
from .language import Syntax, TokenStream, tokenize
from .terms import NetworkSpec

log = logging.getLogger(__name__)


# -- patterns -----------------------------------------------------------------


@dataclass(frozen=True)
class Exact:
    label: Label

    def matches(self, label: Label) -> bool:
        return label == self.label


@dataclass(frozen=True)
class NotLabel:
    label: Label

    def matches(self, label: Label) -> bool:
        return label != self.label


@dataclass(frozen=True)
class AnyLabel:
    def matches(self, label: Label) -> bool:
        return True


Pattern = _Union[Exact, NotLabel, AnyLabel]


# -- expressions --------------------------------------------------------------


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Epsilon:
    pass


@dataclass(frozen=True)
class Atom:
    pattern: Pattern


@dataclass(frozen=True)
class HSeq:
    left: "HazardExpr"
    right: "HazardExpr"


@dataclass(frozen=True)
class Alt:
    left: "HazardExpr"
    right: "HazardExpr"


@dataclass(frozen=True)
class HStar:
    body: "HazardExpr"


HazardExpr = _Union[Empty, Epsilon, Atom, HSeq, Alt, HStar]

ANY_STAR = HStar(Atom(AnyLabel()))


def anchored(expr: HazardExpr, anchor: str) -> HazardExpr:
    """``anywhere`` lets the hazard start mid-trace by prefixing ``any*``."""
    if anchor == "start":
        return expr
    if anchor == "anywhere":
        return HSeq(ANY_STAR, expr)
    raise ValueError(f"anchor must be 'start' or 'anywhere', not {anchor!r}")


def parse_hazard(text: str, spec: NetworkSpec) -> HazardExpr:
    ts = TokenStream(tokenize(text, HazardSyntaxError), HazardSyntaxError)
    parser = _HazardParser(Syntax(ts, spec.schema, spec.packets), spec)
    expr = parser.alt()
    if ts.peek().kind != "eof":
        ts.fail("unexpected trailing input")
    return expr


class _HazardParser:
    def __init__(self, syntax: Syntax, spec: NetworkSpec):
        self.syntax = syntax
        self.ts = syntax.ts
        self.spec = spec

    def alt(self) -> HazardExpr:
        left = self.seq()
        while self.ts.accept("+"):
            left = Alt(left, self.seq())
        return left

    def seq(self) -> HazardExpr:
        left = self.star()
        while self.ts.accept(";"):
            left = HSeq(left, self.star())
        return left

    def star(self) -> HazardExpr:
        expr = self.atom()
        while self.ts.accept("*"):
            expr = HStar(expr)
        return expr

    def atom(self) -> HazardExpr:
        ts = self.ts
        tok = ts.peek()
        if tok.kind == "number" and tok.text in ("0", "1"):
            ts.next()
            return Empty() if tok.text == "0" else Epsilon()
        if ts.accept("any"):
            return Atom(AnyLabel())
        if ts.accept("!"):
            return Atom(NotLabel(label_atom(self.syntax, self.spec)))
        if ts.accept("("):
            expr = self.alt()
            ts.expect(")")
            return expr
        return Atom(Exact(label_atom(self.syntax, self.spec)))


def format_hazard(expr: HazardExpr, spec: NetworkSpec, level: int = 0) -> str:
    if isinstance(expr, Empty):
        return "0"
    if isinstance(expr, Epsilon):
        return "1"
    if isinstance(expr, Atom):
        pat = expr.pattern
        if isinstance(pat, AnyLabel):
            return "any"
        text = render_label(pat.label, spec)
        return "!" + text if isinstance(pat, NotLabel) else text
    if isinstance(expr, Alt):
        text = f"{format_hazard(expr.left, spec, 0)} + {format_hazard(expr.right, spec, 1)}"
        return f"({text})" if level > 0 else text
    if isinstance(expr, HSeq):
        text = f"{format_hazard(expr.left, spec, 1)} ; {format_hazard(expr.right, spec, 2)}"
        return f"({text})" if level > 1 else text
    if isinstance(expr, HStar):
        body = format_hazard(expr.body, spec, 3)
        if isinstance(expr.body, Atom) and isinstance(expr.body.pattern, NotLabel):
            body = f"({body})"  # parses the same either way, but reads better
        return body + "*"
    raise TypeError(f"not a hazard expression: {expr!r}")


# -- derivative matcher -------------------------------------------------------


def nullable(expr: HazardExpr) -> bool:
    if isinstance(expr, (Epsilon, HStar)):
        return True
    if isinstance(expr, (Empty, Atom)):
        return False
    if isinstance(expr, HSeq):
        return nullable(expr.left) and nullable(expr.right)
    if isinstance(expr, Alt):
        return nullable(expr.left) or nullable(expr.right)
    raise TypeError(f"not a hazard expression: {expr!r}")


def _alt(a: HazardExpr, b: HazardExpr) -> HazardExpr:
    if isinstance(a, Empty):
        return b
    if isinstance(b, Empty) or a == b:
        return a
    return Alt(a, b)


def _seq(a: HazardExpr, b: HazardExpr) -> HazardExpr:
    if isinstance(a, Empty) or isinstance(b, Empty):
        return Empty()
    if isinstance(a, Epsilon):
        return b
    if isinstance(b, Epsilon):
        return a
    return HSeq(a, b)


def derivative(expr: HazardExpr, label: Label) -> HazardExpr:
    if isinstance(expr, (Empty, Epsilon)):
        return Empty()
    if isinstance(expr, Atom):
        return Epsilon() if expr.pattern.matches(label) else Empty()
    if isinstance(expr, Alt):
        return _alt(derivative(expr.left, label), derivative(expr.right, label))
    if isinstance(expr, HSeq):
        first = _seq(derivative(expr.left, label), expr.right)
        if nullable(expr.left):
            return _alt(first, derivative(expr.right, label))
        return first
    if isinstance(expr, HStar):
        return _seq(derivative(expr.body, label), expr)
    raise TypeError(f"not a hazard expression: {expr!r}")


def match_word(expr: HazardExpr, word: Iterable[Label]) -> bool:
    for label in word:
        expr = derivative(expr, label)
        if isinstance(expr, Empty):
            return False
    return nullable(expr)


# -- automata -----------------------------------------------------------------


class _NFA:
    """Thompson automaton; symbol edges carry the set of alphabet indices."""

    def __init__(self):
        self.eps: list[list[int]] = []
        self.sym: list[list[tuple[frozenset[int], int]]] = []

    def new(self) -> int:
        self.eps.append([])
        self.sym.append([])
        return len(self.eps) - 1

    def closure(self, states: Iterable[int]) -> frozenset[int]:
        seen = set(states)
        stack = list(seen)
        while stack:
            s = stack.pop()
            for t in self.eps[s]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)


def _thompson(expr: HazardExpr, nfa: _NFA, alphabet: Sequence[Label]) -> tuple[int, int]:
    start, end = nfa.new(), nfa.new()
    if isinstance(expr, Epsilon):
        nfa.eps[start].append(end)
    elif isinstance(expr, Atom):
        letters = frozenset(i for i, l in enumerate(alphabet) if expr.pattern.matches(l))
        if letters:
            nfa.sym[start].append((letters, end))
    elif isinstance(expr, HSeq):
        s1, e1 = _thompson(expr.left, nfa, alphabet)
        s2, e2 = _thompson(expr.right, nfa, alphabet)
        nfa.eps[start].append(s1)
        nfa.eps[e1].append(s2)
        nfa.eps[e2].append(end)
    elif isinstance(expr, Alt):
        for part in (expr.left, expr.right):
            s, e = _thompson(part, nfa, alphabet)
            nfa.eps[start].append(s)
            nfa.eps[e].append(end)
    elif isinstance(expr, HStar):
        s, e = _thompson(expr.body, nfa, alphabet)
        nfa.eps[start] += [s, end]
        nfa.eps[e] += [s, end]
    elif not isinstance(expr, Empty):
        raise TypeError(f"not a hazard expression: {expr!r}")
    return start, end


def _has_atoms(expr: HazardExpr) -> bool:
    if isinstance(expr, Atom):
        return True
    if isinstance(expr, (HSeq, Alt)):
        return _has_atoms(expr.left) or _has_atoms(expr.right)
    if isinstance(expr, HStar):
        return _has_atoms(expr.body)
    return False


@dataclass(frozen=True)
class HazardDFA:
    """Minimal total DFA; states are numbered breadth-first from 0 = initial."""

    alphabet: tuple[Label, ...]
    size: int
    initial: int
    accepting: frozenset[int]
    delta: tuple[tuple[int, ...], ...]  # delta[state][letter index]

    def index(self, label: Label) -> int:
        return self.alphabet.index(label)

    def next(self, state: int, label: Label) -> int:
        return self.delta[state][self._letters[label]]

    @property
    def _letters(self) -> dict[Label, int]:
        cache = self.__dict__.get("_letter_cache")
        if cache is None:
            cache = {l: i for i, l in enumerate(self.alphabet)}
            object.__setattr__(self, "_letter_cache", cache)
        return cache

    def run(self, word: Iterable[Label]) -> int | None:
        state = self.initial
        letters = self._letters
        for label in word:
            if label not in letters:
                return None
            state = self.delta[state][letters[label]]
        return state

    def accepts(self, word: Iterable[Label]) -> bool:
        state = self.run(word)
        return state is not None and state in self.accepting

    def live_states(self) -> frozenset[int]:
        """States from which an accepting state is reachable."""
        live = set(self.accepting)
        changed = True
        while changed:
            changed = False
            for s in range(self.size):
                if s not in live and any(t in live for t in self.delta[s]):
                    live.add(s)
                    changed = True
        return frozenset(live)

    def to_json(self, spec: NetworkSpec) -> str:
        doc = {
            "alphabet": [render_label(l, spec) for l in self.alphabet],
            "states": self.size,
            "initial": self.initial,
            "accepting": sorted(self.accepting),
            "delta": [
                [s, render_label(l, spec), self.delta[s][i]]
                for s in range(self.size)
                for i, l in enumerate(self.alphabet)
            ],
        }
        return json.dumps(doc, indent=2) + "\n"


def compile_dfa(expr: HazardExpr, alphabet: Iterable[Label], spec: NetworkSpec | None = None) -> HazardDFA:
    """Thompson construction, subset construction, then minimisation."""
    letters = list(alphabet)
    if spec is not None:
        letters.sort(key=lambda l: render_label(l, spec))
    if len(set(letters)) != len(letters):
        raise ValueError("alphabet contains duplicate labels")
    if not letters and _has_atoms(expr):
        log.warning("empty alphabet: hazard atoms cannot match, language restricted to the empty word")

    nfa = _NFA()
    start, end = _thompson(expr, nfa, letters)
    init = nfa.closure([start])
    index = {init: 0}
    subsets = [init]
    rows: list[list[int]] = []
    todo = deque([init])
    while todo:
        subset = todo.popleft()
        row = []
        for a in range(len(letters)):
            moved = nfa.closure(t for s in subset for ls, t in nfa.sym[s] if a in ls)
            if moved not in index:
                index[moved] = len(subsets)
                subsets.append(moved)
                todo.append(moved)
            row.append(index[moved])
        rows.append(row)
    accepting = {i for i, s in enumerate(subsets) if end in s}
    return _minimize(tuple(letters), rows, accepting)


def _minimize(alphabet: tuple[Label, ...], rows: list[list[int]], accepting: set[int]) -> HazardDFA:
    n = len(rows)
    block = [1 if s in accepting else 0 for s in range(n)]
    while True:
        signature = {}
        new_block = []
        for s in range(n):
            sig = (block[s], tuple(block[t] for t in rows[s]))
            new_block.append(signature.setdefault(sig, len(signature)))
        if len(signature) == len(set(block)):
            break
        block = new_block
    # renumber breadth-first from the initial block
    order = {block[0]: 0}
    queue = deque([0])
    rep = {block[0]: 0}
    while queue:
        s = queue.popleft()
        for t in rows[s]:
            if block[t] not in order:
                order[block[t]] = len(order)
                rep[block[t]] = t
                queue.append(t)
    delta = [None] * len(order)
    for b, s in rep.items():
        delta[order[b]] = tuple(order[block[t]] for t in rows[s])
    acc = frozenset(order[block[s]] for s in accepting if block[s] in order)
    return HazardDFA(alphabet, len(order), 0, acc, tuple(delta))
