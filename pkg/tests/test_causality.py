import json
import random

import pytest

from dynet_causes.causality import (
    VERDICT_BOUND, VERDICT_FOUND, VERDICT_UNREACHABLE, CauseOptions, Witness, analyse, build_product,
    compute_causes, compute_contingencies, counterfactual_check, enumerate_witnesses,
)
from dynet_causes.errors import AlphabetMismatch, GuardednessError
from dynet_causes.hazard import anchored, compile_dfa, format_hazard, match_word, parse_hazard
from dynet_causes.labels import FreeSend, Proc, parse_word, render_label
from dynet_causes.language import load_spec, parse_spec
from dynet_causes.lts import build_lts
from dynet_causes.netkat import SKIP
from oracles import minimal_matching_words, random_hazard, random_spec_text

TWO_PATHS = "def X = a ! one ; Y (+) b ! one ; Y\ndef Y = c ! one ; bot\ninit = X\n"
BRANCH = "def X = a ! one ; Y (+) b ! one ; bot\ndef Y = c ! one ; bot\ninit = X\n"
LOOP = "def X = a ! one ; X\ninit = X\n"


def words(report):
    return [" ".join(report.label_text(l) for l in c.word) for c in report.causes]


def product_for(text, hazard, anchor="start"):
    spec = load_spec(text)
    lts = build_lts(spec)
    expr = anchored(parse_hazard(hazard, spec), anchor)
    return spec, build_product(lts, compile_dfa(expr, lts.alphabet(), spec))


def test_inert_spec_has_no_causes():
    report = compute_causes(load_spec("init = bot\n"), "any")
    assert report.verdict == VERDICT_UNREACHABLE and report.causes == []


def test_empty_hazard_is_unreachable(vc_spec):
    report = compute_causes(vc_spec, "0")
    assert report.verdict == VERDICT_UNREACHABLE
    assert json.loads(report.to_json())["causes"] == []


def test_epsilon_hazard_gives_the_empty_cause(vc_spec):
    report = compute_causes(vc_spec, "1", CauseOptions(anchor="start"))
    assert report.verdict == VERDICT_FOUND and report.shortest == 0
    assert [c.word for c in report.causes] == [()]


def test_two_paths():
    report = compute_causes(load_spec(TWO_PATHS), "any ; send(c,one)", CauseOptions(anchor="start"))
    assert report.shortest == 2
    assert words(report) == ["send(a,one) send(c,one)", "send(b,one) send(c,one)"]
    assert all(not s for c in report.causes for s in c.contingencies)


def test_contingency_on_the_alternative_branch():
    report = compute_causes(load_spec(BRANCH), "send(a,one) ; send(c,one)", CauseOptions(anchor="start"))
    assert report.lts_states == 3  # both branches end in the same inert state
    (cause,) = report.causes
    assert report.contingency_texts(cause) == [["send(b,one)"], []]
    assert report.decorated(cause) == "{send(b,one)} send(a,one) · send(c,one) ·"


def test_single_successor_positions_have_no_contingencies():
    report = compute_causes(load_spec(BRANCH), "send(c,one)")
    (cause,) = report.causes
    assert [render_label(l, report.spec) for l in cause.word] == ["send(a,one)", "send(c,one)"]
    assert report.contingency_texts(cause) == [["send(b,one)"], []]
    report = compute_causes(load_spec(LOOP), "send(a,one) ; send(a,one)")
    assert all(not s for c in report.causes for s in c.contingencies)


def test_counterfactual_rejects_padded_witness():
    spec, prod = product_for(LOOP, "send(a,one) + send(a,one) ; send(a,one)")
    a = FreeSend("a", SKIP)
    path = [prod.initial]
    for _ in range(2):
        path.append(next(t for l, t in prod.successors(path[-1]) if l == a))
    assert not counterfactual_check(Witness(tuple(path), (a, a)), prod)
    assert counterfactual_check(Witness(tuple(path[:2]), (a,)), prod)


def test_counterfactual_looks_past_rejected_subsequences():
    # every single deletion of abc is rejected, but deleting two leaves "a"
    text = "def X = a ! one ; b ! one ; c ! one ; bot\ninit = X\n"
    spec, prod = product_for(text, "send(a,one) ; send(b,one) ; send(c,one) + send(a,one)")
    labels = tuple(parse_word("send(a,one) send(b,one) send(c,one)", spec))
    path = [prod.initial]
    for label in labels:
        path.append(next(t for l, t in prod.successors(path[-1]) if l == label))
    assert prod.accepts_word(labels)
    assert not any(prod.accepts_word(labels[:i] + labels[i + 1:]) for i in range(3))
    assert not counterfactual_check(Witness(tuple(path), labels), prod)


def test_witness_bound(vc_spec):
    report = compute_causes(vc_spec, "proc(s1,s2) ; any*", CauseOptions(max_len=1))
    assert report.verdict == VERDICT_BOUND and report.shortest == 2 and report.causes == []


def test_start_anchor_on_running_hazard(vc_spec, vc_hazard):
    assert compute_causes(vc_spec, vc_hazard, CauseOptions(anchor="start")).verdict == VERDICT_UNREACHABLE


def test_causes_end_with_the_hazard_event(vc_spec):
    report = compute_causes(vc_spec, "proc(s3,s4) ; any*")
    s3, s4 = vc_spec.packets["s3"], vc_spec.packets["s4"]
    assert report.causes
    for cause in report.causes:
        assert cause.word[-1] == Proc(s3, s4)


def test_alphabet_mismatch_is_reported(vc_spec, vc_lts):
    dfa = compile_dfa(parse_hazard("any", vc_spec), vc_lts.alphabet()[:2])
    with pytest.raises(AlphabetMismatch):
        build_product(vc_lts, dfa)


def test_unguarded_spec_is_rejected_before_exploration(vc_text):
    spec = parse_spec(vc_text.replace("def C2  = VirtualCircuitReq ! one ; C2'", "def C2 = C2"))
    with pytest.raises(GuardednessError):
        compute_causes(spec, "any")


def test_running_example_report(vc_spec, vc_hazard):
    report = compute_causes(vc_spec, vc_hazard)
    assert report.verdict == VERDICT_FOUND
    assert report.shortest == 4
    assert len(report.witnesses) == 16
    assert len(report.causes) == 12
    doc = json.loads(report.to_json())
    assert list(doc) == ["verdict", "hazard", "anchor", "lts", "shortest", "witnesses", "causes"]
    assert doc["lts"] == {"states": 48, "transitions": 280}
    assert doc["causes"][0]["word"] == [
        "recv(NoVirtualCircuit,one)", "recv(VirtualCircuitReq,one)", "proc(s1,s2)", "proc(s3,s4)",
    ]
    with_fix = [c for c in doc["causes"] if any(c["contingencies"])]
    assert len(with_fix) == 6
    assert {x for c in with_fix for s in c["contingencies"] for x in s} == {"send(VirtualCircuitEnd,one)"}


def test_binary_sync_gives_the_same_words(vc_spec, vc_hazard):
    multi = compute_causes(vc_spec, vc_hazard)
    binary = compute_causes(vc_spec, vc_hazard, CauseOptions(sync_arity="binary"))
    assert words(multi) == words(binary)


def test_every_contingency_really_blocks_the_hazard(vc_spec, vc_hazard):
    lts = build_lts(vc_spec)
    expr = anchored(parse_hazard(vc_hazard, vc_spec), "anywhere")
    prod = build_product(lts, compile_dfa(expr, lts.alphabet(), vc_spec))
    coreach = prod.coreachable()
    for w in enumerate_witnesses(prod).witnesses:
        for position in compute_contingencies(w, prod, coreach):
            for c in position:
                assert c.target not in coreach
                assert (c.label, c.target) in prod.successors(c.source)


def _cases(n):
    out = []
    seed = 0
    while len(out) < n:
        rng = random.Random(seed)
        spec = load_spec(random_spec_text(rng))
        lts = build_lts(spec)
        if len(lts.states) >= 3:
            labels = lts.alphabet()
            out.append((seed, spec, lts, format_hazard(random_hazard(rng, labels, 3), spec)))
        seed += 1
    return out


@pytest.mark.parametrize("seed, spec, lts, hazard", _cases(15), ids=lambda v: str(v) if isinstance(v, int) else "")
def test_soundness_minimality_counterfactuality(seed, spec, lts, hazard):
    options = CauseOptions()
    report = analyse(lts, hazard, options)
    expr = anchored(parse_hazard(hazard, spec), options.anchor)
    shortest, expected = minimal_matching_words(lts, lambda w: match_word(expr, w), 7)
    if report.verdict == VERDICT_UNREACHABLE:
        assert shortest is None
        return
    assert report.shortest == shortest
    assert {w.word for w in report.witnesses} == expected
    for cause in report.causes:
        assert lts.replays(cause.word)
        assert match_word(expr, cause.word)
        for i in range(len(cause.word)):
            assert not match_word(expr, cause.word[:i] + cause.word[i + 1:]) or not lts.replays(
                cause.word[:i] + cause.word[i + 1:]
            )
