"""
Tests for the transition rules, step composition and LTS construction
"""

import pytest

from pa_enumeration import EnumSpec, enum_terms
from pa_semantics import (TERM, Step, build_lts, compose_steps, init_state,
                          lts_to_dot, lts_to_json, steps)
from pa_settings import Budgets, BudgetExceededError
from pa_syntax import PA1, PA2, OperatorNotInSystemError, parse_term


def step_labels(text, system, config):
    return sorted(str(t.step) for t in steps(init_state(parse_term(text, system)), system, config))


def test_compose_steps_optional(cfg0):
    assert compose_steps(Step.of("a"), Step.of("b"), cfg0) == {Step.of("a", "b"), Step.of("c")}


def test_compose_steps_forced(cfg0_forced):
    assert compose_steps(Step.of("a"), Step.of("b"), cfg0_forced) == {Step.of("c")}


def test_compose_steps_without_partners(cfg0, cfg0_forced):
    for config in (cfg0, cfg0_forced):
        assert compose_steps(Step.of("a"), Step.of("d"), config) == {Step.of("a", "d")}


def test_step_labels_are_sorted_multisets():
    assert Step.of("b", "a", "b").labels == ("a", "b", "b")
    assert str(Step.of("d", "a")) == "a+d"


def test_parallel_steps(cfg0, cfg0_forced):
    assert step_labels("a || b", PA1, cfg0) == ["a+b", "c"]
    assert step_labels("a || b", PA1, cfg0_forced) == ["c"]


def test_parallel_is_lockstep(cfg_empty):
    assert step_labels("(a + b) || d", PA1, cfg_empty) == ["a+d", "b+d"]


def test_left_merge_respects_order(cfg0):
    assert step_labels("a |_ b", PA2, cfg0) == ["a+b"]
    assert step_labels("b |_ a", PA2, cfg0) == []


def test_communication_merge(cfg0):
    assert step_labels("a | b", PA2, cfg0) == ["c"]
    assert step_labels("a | a", PA2, cfg0) == []


def test_pa1_rejects_merge_states(cfg0):
    with pytest.raises(OperatorNotInSystemError):
        steps(init_state(parse_term("a |_ b", PA2)), PA1, cfg0)


def test_sequence_records_causality(cfg_empty):
    first = steps(init_state(parse_term("a . b")), PA1, cfg_empty)
    assert len(first) == 1
    (occurrence,) = first[0].occurrences
    assert occurrence.ident == (0,) and occurrence.causes == frozenset()
    second = steps(first[0].target, PA1, cfg_empty)
    (later,) = second[0].occurrences
    assert later.label == "b"
    assert later.causes == frozenset({(0,)})
    assert second[0].target is TERM


@pytest.mark.parametrize("causality, expected", [
    ("sequential", {(0,)}),
    ("synchronous", {(0,), (2,)}),
])
def test_causality_modes(cfg_empty, causality, expected):
    config = cfg_empty.with_overrides(causality=causality)
    first = steps(init_state(parse_term("(a . b) || (c . d)")), PA1, config)
    assert [str(t.step) for t in first] == ["a+c"]
    second = steps(first[0].target, PA1, config)
    assert [str(t.step) for t in second] == ["b+d"]
    by_label = {o.label: o for o in second[0].occurrences}
    assert by_label["b"].causes == frozenset(expected)


def test_communication_joins_occurrence_ids(cfg0):
    (transition,) = steps(init_state(parse_term("a | b", PA2)), PA2, cfg0)
    (occurrence,) = transition.occurrences
    assert occurrence.label == "c"
    assert occurrence.ident == (0, 1)


def test_lts_of_sequenced_parallel(cfg_empty):
    lts = build_lts(parse_term("(a . b) || d"), PA1, cfg_empty)
    assert lts.state_count == 3
    assert [(str(step), lts.is_terminal(target)) for _, step, target in lts.edges()][0] == ("a+d", False)
    assert lts.is_acyclic()
    assert lts.stuck == []


def test_lts_merges_duplicate_transitions(cfg_empty):
    lts = build_lts(parse_term("a + a"), PA1, cfg_empty)
    assert lts.state_count == 2
    assert len(lts.edges()) == 1


def test_stuck_state(cfg0):
    lts = build_lts(parse_term("b |_ a", PA2), PA2, cfg0)
    assert lts.state_count == 1
    assert lts.stuck == [0]
    assert not lts.is_terminal(0)


def test_state_budget(cfg0):
    with pytest.raises(BudgetExceededError):
        build_lts(parse_term("a . b . c"), PA1, cfg0, Budgets(states=2))


def test_lts_json(cfg_empty):
    document = lts_to_json(build_lts(parse_term("a || d"), PA1, cfg_empty))
    assert document == {
        "states": ["a || d", "TERM"],
        "edges": [{"from": 0, "label": ["a", "d"], "to": 1}],
        "initial": 0,
        "stuck": [],
    }


def test_lts_dot(cfg_empty):
    text = lts_to_dot(build_lts(parse_term("a . b"), PA1, cfg_empty))
    assert "digraph" in text
    assert "doublecircle" in text


@pytest.mark.parametrize("policy", ["optional", "forced"])
def test_pa1_terms_never_get_stuck(cfg0, cfg_empty, policy):
    for config in (cfg0.with_overrides(policy=policy), cfg_empty):
        for term in enum_terms(EnumSpec(PA1, ("a", "b"), 5)):
            lts = build_lts(term, PA1, config)
            assert lts.stuck == [], term
