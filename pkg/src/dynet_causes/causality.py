"""Counterfactual causes of hazards.

The LTS is read as a finite automaton in which every state accepts, so the
product with the hazard DFA accepts exactly when the DFA does. Causes are the
shortest accepted words, kept only if no proper subsequence is itself an
accepted run, and decorated with contingencies: alternative moves after
which the hazard can no longer be reached.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .errors import AlphabetMismatch, DynetError
from .hazard import HazardDFA, anchored, compile_dfa, match_word, parse_hazard
from .labels import Label, render_label
from .lts import LTS, build_lts
from .terms import NetworkSpec, validate_guardedness

VERDICT_UNREACHABLE = "hazard-unreachable"
VERDICT_FOUND = "causes-found"
VERDICT_BOUND = "witness-bound-exceeded"


@dataclass
class ProductAutomaton:
    lts: LTS
    dfa: HazardDFA
    states: list[tuple[int, int]]  # (lts state, dfa state), reachable only
    transitions: list[tuple[int, Label, int]]
    initial: int = 0
    accepting: frozenset[int] = frozenset()
    _succ: list[list[tuple[Label, int]]] = field(default=None, repr=False)

    def successors(self, state: int) -> list[tuple[Label, int]]:
        if self._succ is None:
            self._succ = [[] for _ in self.states]
            for src, label, dst in self.transitions:
                self._succ[src].append((label, dst))
        return self._succ[state]

    def coreachable(self) -> frozenset[int]:
        """States from which some accepting state is reachable."""
        preds: list[list[int]] = [[] for _ in self.states]
        for src, _, dst in self.transitions:
            preds[dst].append(src)
        seen = set(self.accepting)
        todo = deque(seen)
        while todo:
            s = todo.popleft()
            for p in preds[s]:
                if p not in seen:
                    seen.add(p)
                    todo.append(p)
        return frozenset(seen)

    def distances(self) -> list[int | None]:
        dist: list[int | None] = [None] * len(self.states)
        dist[self.initial] = 0
        todo = deque([self.initial])
        while todo:
            s = todo.popleft()
            for _, t in self.successors(s):
                if dist[t] is None:
                    dist[t] = dist[s] + 1
                    todo.append(t)
        return dist

    def accepts_word(self, word) -> bool:
        """Whether some run over ``word`` from the initial state ends accepting."""
        current = {self.initial}
        for label in word:
            current = {t for s in current for l, t in self.successors(s) if l == label}
            if not current:
                return False
        return any(s in self.accepting for s in current)


def build_product(lts: LTS, dfa: HazardDFA) -> ProductAutomaton:
    alphabet = set(dfa.alphabet)
    missing = sorted({render_label(l, lts.spec) for _, l, _ in lts.transitions if l not in alphabet})
    if missing:
        raise AlphabetMismatch(missing)
    start = (lts.initial, dfa.initial)
    index = {start: 0}
    states = [start]
    transitions = []
    todo = deque([0])
    while todo:
        i = todo.popleft()
        s, q = states[i]
        for label, t in lts.successors(s):
            pair = (t, dfa.next(q, label))
            j = index.get(pair)
            if j is None:
                j = index[pair] = len(states)
                states.append(pair)
                todo.append(j)
            transitions.append((i, label, j))
    accepting = frozenset(i for i, (_, q) in enumerate(states) if q in dfa.accepting)
    return ProductAutomaton(lts, dfa, states, transitions, 0, accepting)


@dataclass(frozen=True)
class Witness:
    path: tuple[int, ...]  # product states, len(word) + 1 of them
    word: tuple[Label, ...]


@dataclass
class WitnessSearch:
    status: str  # one of the VERDICT_* constants
    shortest: int | None
    witnesses: list[Witness]


def enumerate_witnesses(prod: ProductAutomaton, max_len: int | None = None) -> WitnessSearch:
    """All accepted paths of minimal word length.

    Every such path is a shortest path, hence simple.
    """
    if max_len is None:
        max_len = len(prod.states)
    coreach = prod.coreachable()
    if prod.initial not in coreach:
        return WitnessSearch(VERDICT_UNREACHABLE, None, [])
    dist = prod.distances()
    shortest = min(dist[a] for a in prod.accepting if dist[a] is not None)
    if shortest > max_len:
        return WitnessSearch(VERDICT_BOUND, shortest, [])

    # states lying on some shortest accepting path, by level
    on_path = {a for a in prod.accepting if dist[a] == shortest}
    frontier = set(on_path)
    for level in range(shortest - 1, -1, -1):
        frontier = {
            s
            for s in range(len(prod.states))
            if dist[s] == level and any(t in frontier for _, t in prod.successors(s))
        }
        on_path |= frontier

    found: list[Witness] = []

    def extend(path: list[int], word: list[Label]) -> None:
        s = path[-1]
        if len(word) == shortest:
            if s in prod.accepting:
                found.append(Witness(tuple(path), tuple(word)))
            return
        for label, t in prod.successors(s):
            if t in on_path and dist[t] == len(word) + 1:
                path.append(t)
                word.append(label)
                extend(path, word)
                path.pop()
                word.pop()

    extend([prod.initial], [])
    spec = prod.lts.spec
    found.sort(key=lambda w: ([render_label(l, spec) for l in w.word], w.path))
    return WitnessSearch(VERDICT_FOUND, shortest, found)


def counterfactual_check(w: Witness, prod: ProductAutomaton) -> bool:
    """True iff no proper subsequence of the witness word is accepted.

    Single deletions are tried first; sub-subsequences are explored from
    every variant, since an accepted word can hide behind a rejected one.
    """
    seen: set[tuple[Label, ...]] = set()
    todo = [tuple(w.word)]
    while todo:
        word = todo.pop()
        for i in range(len(word)):
            variant = word[:i] + word[i + 1:]
            if variant in seen:
                continue
            seen.add(variant)
            if prod.accepts_word(variant):
                return False
            todo.append(variant)
    return True


@dataclass(frozen=True)
class Contingency:
    position: int
    label: Label
    source: int  # product state where the alternative is taken
    target: int  # product state it leads to, from which acceptance is unreachable


def compute_contingencies(
    w: Witness, prod: ProductAutomaton, coreach: frozenset[int] | None = None
) -> list[list[Contingency]]:
    """Per-position alternatives that make the hazard unreachable.

    One list per label of the word, plus a trailing list for the final state
    when it has such successors.
    """
    if coreach is None:
        coreach = prod.coreachable()
    out = []
    for i, src in enumerate(w.path):
        taken = (w.word[i], w.path[i + 1]) if i < len(w.word) else None
        here = [
            Contingency(i, label, src, t)
            for label, t in prod.successors(src)
            if (label, t) != taken and t not in coreach
        ]
        if i < len(w.word) or here:
            out.append(here)
    return out


@dataclass
class Cause:
    word: tuple[Label, ...]
    contingencies: list[list[Contingency]]
    witnesses: list[Witness]


@dataclass
class CauseOptions:
    anchor: str = "anywhere"
    sync_match: str = "syntactic"
    sync_arity: str = "multi"
    max_states: int | None = None
    max_len: int | None = None


@dataclass
class CauseReport:
    spec: NetworkSpec
    hazard: str
    anchor: str
    lts_states: int
    lts_transitions: int
    verdict: str
    shortest: int | None
    witnesses: list[Witness]
    causes: list[Cause]

    def label_text(self, label: Label) -> str:
        return render_label(label, self.spec)

    def contingency_texts(self, cause: Cause) -> list[list[str]]:
        return [sorted({self.label_text(c.label) for c in pos}) for pos in cause.contingencies]

    def to_json(self) -> str:
        doc = {
            "verdict": self.verdict,
            "hazard": self.hazard,
            "anchor": self.anchor,
            "lts": {"states": self.lts_states, "transitions": self.lts_transitions},
            "shortest": self.shortest,
            "witnesses": len(self.witnesses),
            "causes": [
                {
                    "word": [self.label_text(l) for l in cause.word],
                    "contingencies": self.contingency_texts(cause),
                }
                for cause in self.causes
            ],
        }
        return json.dumps(doc, indent=2) + "\n"

    def decorated(self, cause: Cause) -> str:
        """``{w0} a0 {w1} a1 ... {wn}`` with ``·`` for an empty set."""
        sets = self.contingency_texts(cause)
        parts = []
        for i, label in enumerate(cause.word):
            parts.append("{" + ", ".join(sets[i]) + "}" if sets[i] else "·")
            parts.append(self.label_text(label))
        if len(sets) > len(cause.word):
            parts.append("{" + ", ".join(sets[-1]) + "}")
        else:
            parts.append("·")
        return " ".join(parts)

    def to_text(self) -> str:
        lines = [
            f"verdict: {self.verdict}",
            f"hazard: {self.hazard}",
            f"anchor: {self.anchor}",
            f"lts: {self.lts_states} states, {self.lts_transitions} transitions",
        ]
        if self.verdict == VERDICT_BOUND:
            lines.append(f"shortest witness has length {self.shortest}, beyond the bound")
        elif self.verdict == VERDICT_FOUND:
            lines.append(f"witnesses: {len(self.witnesses)} of length {self.shortest}")
            lines.append(f"causes: {len(self.causes)}")
            for n, cause in enumerate(self.causes, 1):
                lines.append(f"  {n}. {self.decorated(cause)}")
        return "\n".join(lines) + "\n"


def analyse(lts: LTS, hazard_text: str, options: CauseOptions) -> CauseReport:
    """Run the causal analysis on an already built LTS."""
    spec = lts.spec
    expr = anchored(parse_hazard(hazard_text, spec), options.anchor)
    dfa = compile_dfa(expr, lts.alphabet(), spec)
    prod = build_product(lts, dfa)
    search = enumerate_witnesses(prod, options.max_len)
    causes: list[Cause] = []
    if search.status == VERDICT_FOUND:
        coreach = prod.coreachable()
        by_word: dict[tuple[Label, ...], Cause] = {}
        for w in search.witnesses:
            if not match_word(expr, w.word):
                raise DynetError("internal error: witness rejected by the derivative matcher")
            if not counterfactual_check(w, prod):
                continue
            conts = compute_contingencies(w, prod, coreach)
            cause = by_word.get(w.word)
            if cause is None:
                by_word[w.word] = Cause(w.word, conts, [w])
            else:
                # same word through different states: merge decorations position-wise
                cause.witnesses.append(w)
                for i, extra in enumerate(conts):
                    if i < len(cause.contingencies):
                        cause.contingencies[i].extend(extra)
                    else:
                        cause.contingencies.append(list(extra))
        causes = sorted(by_word.values(), key=lambda c: [render_label(l, spec) for l in c.word])
    return CauseReport(
        spec,
        hazard_text,
        options.anchor,
        len(lts.states),
        len(lts.transitions),
        search.status,
        search.shortest,
        search.witnesses,
        causes,
    )


def compute_causes(spec: NetworkSpec, hazard_text: str, options: CauseOptions | None = None) -> CauseReport:
    """Full pipeline: LTS, hazard DFA, product, witnesses, causes."""
    options = options or CauseOptions()
    validate_guardedness(spec)
    lts = build_lts(spec, options.max_states, options.sync_match, options.sync_arity)
    return analyse(lts, hazard_text, options)
