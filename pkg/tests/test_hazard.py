import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynet_causes import RUNNING_EXAMPLE_HAZARD, running_example_text
from dynet_causes.errors import HazardSyntaxError
from dynet_causes.hazard import (
    ANY_STAR, Alt, AnyLabel, Atom, Empty, Epsilon, Exact, HSeq, HStar, NotLabel,
    anchored, compile_dfa, format_hazard, match_word, parse_hazard,
)
from dynet_causes.labels import FreeRecv, FreeSend, Proc, Sync, parse_word
from dynet_causes.language import load_spec
from dynet_causes.netkat import SKIP
from oracles import random_hazard, regex_accepts

SPEC = load_spec(running_example_text())
P = SPEC.packets
VCE_SEND = FreeSend("VirtualCircuitEnd", SKIP)
VCE_SYNC = Sync("VirtualCircuitEnd", SKIP)
PROC12 = Proc(P["s1"], P["s2"])
PROC34 = Proc(P["s3"], P["s4"])

POOL = [
    PROC12, PROC34, VCE_SEND, VCE_SYNC,
    FreeRecv("NoVirtualCircuit", SKIP), Sync("VirtualCircuitReq", SKIP),
    Proc(P["s1"], P["s1"]), FreeSend("VirtualCircuitReq", SKIP),
]


def h():
    return parse_hazard(RUNNING_EXAMPLE_HAZARD, SPEC)


def test_parse_running_hazard():
    expected = HSeq(
        HSeq(HSeq(Atom(Exact(PROC12)), HStar(Atom(NotLabel(VCE_SEND)))), Atom(Exact(PROC34))),
        ANY_STAR,
    )
    assert h() == expected
    assert format_hazard(h(), SPEC) == RUNNING_EXAMPLE_HAZARD


def test_parse_constants():
    assert parse_hazard("0", SPEC) == Empty()
    assert parse_hazard("1*", SPEC) == HStar(Epsilon())
    assert parse_hazard("any + 1", SPEC) == Alt(Atom(AnyLabel()), Epsilon())


def test_parse_inline_packets_and_policies():
    expr = parse_hazard("proc({port:1},s2) ; send(VirtualCircuitEnd, port=1 + port=2)", SPEC)
    assert expr.left == Atom(Exact(PROC12))


@pytest.mark.parametrize(
    "text", ["proc(s1)", "send(Nowhere,one)", "proc(s1,s9)", "(any", "any ;", "foo(s1,s2)", "any )"]
)
def test_parse_errors(text):
    with pytest.raises(HazardSyntaxError) as info:
        parse_hazard(text, SPEC)
    assert info.value.line == 1 and info.value.column is not None
    assert info.value.diagnostic().startswith("hazard:")


def test_match_word_examples():
    assert match_word(h(), [PROC12, PROC34])
    assert match_word(h(), [PROC12, VCE_SYNC, PROC34, VCE_SEND])
    assert not match_word(h(), [PROC12, VCE_SEND, PROC34])
    assert not match_word(h(), [PROC34, PROC12])
    assert not match_word(h(), [])
    assert match_word(anchored(h(), "anywhere"), [VCE_SEND, PROC12, PROC34])
    assert not match_word(anchored(h(), "start"), [VCE_SEND, PROC12, PROC34])


def test_not_label_is_a_single_symbol():
    neg = Atom(NotLabel(VCE_SEND))
    assert match_word(neg, [VCE_SYNC])
    assert not match_word(neg, [VCE_SEND])
    assert not match_word(neg, [])
    assert not match_word(neg, [VCE_SYNC, VCE_SYNC])


def test_word_parsing():
    assert parse_word("proc(s1,s2) sync(VirtualCircuitEnd,one)", SPEC) == [PROC12, VCE_SYNC]
    assert parse_word("proc(s1,s2), proc(s3,s4)", SPEC) == [PROC12, PROC34]
    assert parse_word("", SPEC) == []


def test_any_star_is_one_accepting_state():
    dfa = compile_dfa(ANY_STAR, POOL[:4], SPEC)
    assert dfa.size == 1 and dfa.accepting == {0}


def test_empty_language_is_one_rejecting_state():
    dfa = compile_dfa(Empty(), POOL[:4], SPEC)
    assert dfa.size == 1 and dfa.accepting == frozenset()


def test_running_hazard_dfa(vc_lts):
    dfa = compile_dfa(anchored(h(), "anywhere"), vc_lts.alphabet(), SPEC)
    assert len(dfa.alphabet) == len(set(l for _, l, _ in vc_lts.transitions))
    assert dfa.accepts([VCE_SEND, PROC12, PROC34])
    assert not dfa.accepts([PROC12, VCE_SEND, PROC34])
    # any* ; proc(s1,s2) ; (!send)* ; proc(s3,s4) ; any* minimises to 3 states
    assert dfa.size == 3


def test_dfa_is_deterministic_and_minimal_on_equivalent_inputs():
    a, b = POOL[0], POOL[1]
    left = compile_dfa(HStar(Alt(Atom(Exact(a)), Atom(Exact(b)))), [a, b])
    right = compile_dfa(HStar(Atom(AnyLabel())), [a, b])
    assert left == right


def test_empty_alphabet_warns(caplog):
    dfa = compile_dfa(Atom(Exact(PROC12)), [])
    assert dfa.accepting == frozenset()
    assert "empty alphabet" in caplog.text


def _labels(n):
    return st.lists(st.sampled_from(POOL), min_size=1, max_size=n, unique=True)


@st.composite
def expr_and_alphabet(draw):
    alphabet = draw(_labels(6))
    rng = random.Random(draw(st.integers(0, 2**32)))
    # atoms may mention labels outside the alphabet, as in real hazards
    return random_hazard(rng, POOL[:6], depth=4), alphabet


@settings(max_examples=150, deadline=None)
@given(expr_and_alphabet())
def test_dfa_agrees_with_matchers(case):
    expr, alphabet = case
    dfa = compile_dfa(expr, alphabet, SPEC)
    for n in range(4):
        for word in itertools.product(alphabet, repeat=n):
            expected = regex_accepts(expr, word)
            assert match_word(expr, word) == expected
            assert dfa.accepts(word) == expected


@settings(max_examples=100, deadline=None)
@given(expr_and_alphabet())
def test_dfa_is_total(case):
    expr, alphabet = case
    dfa = compile_dfa(expr, alphabet, SPEC)
    assert len(dfa.delta) == dfa.size
    for row in dfa.delta:
        assert len(row) == len(dfa.alphabet)
        assert all(0 <= t < dfa.size for t in row)


@settings(max_examples=100, deadline=None)
@given(expr_and_alphabet())
def test_format_parse_round_trip(case):
    expr, _ = case
    assert parse_hazard(format_hazard(expr, SPEC), SPEC) == expr
