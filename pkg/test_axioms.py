"""
Tests for axiom schemas, instantiation and normalization
"""

import random

import pytest

from pa_axioms import (IS_NORMAL_CACHE_SIZE, LITERAL_FOLD, NIL, SKIP, TERMINAL, EventVar, GammaOf,
                       IllTypedSubstitutionError, NormalForm, RuleApplication, Var,
                       axiom_schemas, instantiate, is_normal, nf_fingerprint, nf_to_term,
                       normalize, replay)
from pa_enumeration import EnumSpec, enum_terms, sample_terms
from pa_equivalence import step_fingerprint
from pa_semantics import Step
from pa_settings import Budgets, BudgetExceededError
from pa_syntax import (PA1, PA2, Atom, CommMerge, LeftMerge, Nil, PAError, Par, Plus, Seq,
                       StepAtom, parse_term)

x, y = Var("x"), Var("y")
e1, e2 = EventVar("e1"), EventVar("e2")


def schema(system, name, include_derived=False):
    return next(s for s in axiom_schemas(system, include_derived) if s.name == name)


def test_pa1_table():
    names = [s.name for s in axiom_schemas(PA1)]
    assert names == ["A1", "A2", "A3", "A4", "A5", "P1", "P2", "P3", "P4", "P5", "P6", "P7"]
    p5 = schema(PA1, "P5")
    assert p5.lhs == Par(Seq(e1, x), Seq(e2, y))
    assert p5.rhs == Seq(Par(e1, e2), Par(x, y))


def test_pa2_table():
    names = [s.name for s in axiom_schemas(PA2)]
    assert names == ["A1", "A2", "A3", "A4", "A5", "P1", "L2", "L3", "L4", "L5",
                     "C6", "C7", "C8", "C9", "C10", "C11"]
    c9 = schema(PA2, "C9")
    assert c9.rhs == Seq(GammaOf("e1", "e2"), Par(x, y))
    assert c9.side_condition == "gamma"
    assert schema(PA2, "L5").lhs == LeftMerge(Plus(x, y), Var("z"))
    assert schema(PA2, "L2").side_condition == "leq"


def test_derived_rules_are_opt_in():
    plain = {s.name for s in axiom_schemas(PA2)}
    derived = {s.name for s in axiom_schemas(PA2, include_derived=True)} - plain
    assert {"L6", "L0a", "C0d", "Z+l", "Z||r"} <= derived
    assert all(s.derived for s in axiom_schemas(PA2, include_derived=True) if s.name in derived)


def test_instantiate_a3(cfg0):
    ab = Seq(Atom("a"), Atom("b"))
    assert instantiate(schema(PA1, "A3"), {"x": ab}, {}, cfg0) == (Plus(ab, ab), ab)


def test_instantiate_skips_on_order(cfg0):
    assert instantiate(schema(PA2, "L2"), {"y": Atom("a")}, {"e1": "b", "e2": "a"}, cfg0) is SKIP


def test_instantiate_communication(cfg0):
    lhs, rhs = instantiate(schema(PA2, "C6"), {}, {"e1": "a", "e2": "b"}, cfg0)
    assert lhs == CommMerge(Atom("a"), Atom("b"))
    assert rhs == Atom("c")
    assert instantiate(schema(PA2, "C6"), {}, {"e1": "a", "e2": "a"}, cfg0) is SKIP


def test_instantiate_rejects_pa2_terms_in_pa1(cfg0):
    with pytest.raises(IllTypedSubstitutionError):
        instantiate(schema(PA1, "P1"), {"x": LeftMerge(Atom("a"), Atom("b")), "y": Atom("a")}, {}, cfg0)


def test_instantiate_needs_every_variable(cfg0):
    with pytest.raises(PAError):
        instantiate(schema(PA1, "A4"), {"x": Atom("a")}, {}, cfg0)


def nf(text, system, config, **options):
    return normalize(parse_term(text, system), system, config, **options).nf


def test_normalize_idempotent_choice(cfg_empty):
    assert nf("a + a", PA1, cfg_empty) == NormalForm.of([(Step.of("a"), TERMINAL)])
    assert nf("a + a", PA1, cfg_empty).code == "a"


def test_normalize_distributes_sequence(cfg_empty):
    assert nf("(a + b) . d", PA1, cfg_empty) == nf("a . d + b . d", PA1, cfg_empty)
    assert nf("(a + b) . d", PA1, cfg_empty).code == "a . d + b . d"


def test_normalize_stuck_left_merge(cfg0):
    assert nf("b |_ a", PA2, cfg0) == NIL
    assert NIL.code == "0"


def test_normalize_parallel_under_pa2(cfg0):
    report = normalize(parse_term("a || b"), PA2, cfg0)
    assert report.nf.code == "c + {a,b}"
    assert [step.rule for step in report.rule_trace][0] == "P1"


def test_policy_coherence(cfg0_forced):
    assert nf("a || b", PA1, cfg0_forced).code == "c"
    assert nf("a || b", PA2, cfg0_forced).code == "c"
    assert nf_fingerprint(nf("a || b", PA1, cfg0_forced)) == \
        step_fingerprint(parse_term("a || b"), PA1, cfg0_forced)


def test_literal_fold_ignores_communication(cfg0):
    assert nf("a || b", PA1, cfg0, fold=LITERAL_FOLD).code == "{a,b}"
    assert nf("a || b", PA1, cfg0).code == "c + {a,b}"
    assert nf("c + a || b", PA1, cfg0, fold=LITERAL_FOLD).code == "c + {a,b}"


def test_normal_form_display(cfg_empty):
    assert nf("a . (b + d) + a . b . b", PA1, cfg_empty).code == "a . (b + d) + a . b . b"
    assert nf("(a . b) || d", PA1, cfg_empty).code == "{a,d} . b"


def test_nf_to_term(cfg_empty):
    form = nf("(a . b) || d", PA1, cfg_empty)
    assert nf_to_term(form) == Seq(StepAtom(("a", "d")), Atom("b"))
    assert nf_to_term(NIL) == Nil()
    assert is_normal(nf_to_term(form))


def test_trace_replays(cfg0):
    for text in ["(a + b) . (c || d)", "a || (b . c + d)", "(a |_ b) . (a | b)"]:
        report = normalize(parse_term(text), PA2, cfg0)
        assert replay(report.input, report.rule_trace, PA2, cfg0) == report.nf


def test_replay_rejects_a_wrong_trace(cfg0):
    with pytest.raises(PAError):
        replay(parse_term("a + a"), [RuleApplication("A4", ())], PA2, cfg0)


def test_rewrite_budget(cfg_empty):
    with pytest.raises(BudgetExceededError):
        normalize(parse_term("((a + b) . d) . d"), PA1, cfg_empty, Budgets(rewrites=1))


def test_normal_forms_denote_the_same_step_tree(cfg_empty):
    for term in enum_terms(EnumSpec(PA1, ("a", "b"), 5)):
        form = normalize(term, PA1, cfg_empty).nf
        assert nf_fingerprint(form) == step_fingerprint(term, PA1, cfg_empty), term
        assert step_fingerprint(nf_to_term(form), PA1, cfg_empty) == nf_fingerprint(form)


@pytest.mark.parametrize("policy", ["optional", "forced"])
def test_pa2_normal_forms_denote_the_same_step_tree(cfg0, policy):
    config = cfg0.with_overrides(policy=policy)
    for term in enum_terms(EnumSpec(PA2, ("a", "b"), 3)):
        form = normalize(term, PA2, config).nf
        assert nf_fingerprint(form) == step_fingerprint(term, PA2, config), term


def test_random_rule_orders_agree(cfg0):
    terms = sample_terms(EnumSpec(PA2, ("a", "b"), 7), 40, random.Random(7))
    for term in terms:
        expected = normalize(term, PA2, cfg0).nf
        for seed in range(5):
            assert normalize(term, PA2, cfg0, strategy=random.Random(seed)).nf == expected, term


def test_is_normal_cache_is_bounded(cfg0):
    for term in enum_terms(EnumSpec(PA2, ("a", "b"), 3)):
        normalize(term, PA2, cfg0)
    info = is_normal.cache_info()
    assert info.maxsize == IS_NORMAL_CACHE_SIZE
    assert 0 < info.currsize <= IS_NORMAL_CACHE_SIZE
