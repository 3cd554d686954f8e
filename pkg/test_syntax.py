"""
Tests for term parsing, printing and config loading
"""

import pytest
from hypothesis import given, settings, strategies as st

from pa_syntax import (PA1, PA2, Atom, CommMerge, ConfigError, LeftMerge,
                       OperatorNotInSystemError, PASyntaxError, Par, Plus, Seq,
                       SemanticsConfig, UnknownLabelError, format_term, load_config,
                       parse_term, permissive_config, system_of)

a, b, c, d = Atom("a"), Atom("b"), Atom("c"), Atom("d")


def test_sequence_binds_tighter_than_choice():
    assert parse_term("a + b.d") == Plus(a, Seq(b, d))


def test_parentheses():
    assert parse_term("(a || b) . d") == Seq(Par(a, b), d)


def test_left_merge_rejected_in_pa1():
    with pytest.raises(OperatorNotInSystemError):
        parse_term("a |_ b", PA1)


def test_merges_parse_in_pa2():
    assert parse_term("a |_ b", PA2) == LeftMerge(a, b)
    assert parse_term("a | b", PA2) == CommMerge(a, b)


def test_unknown_label(cfg0):
    with pytest.raises(UnknownLabelError):
        parse_term("a + e", PA2, cfg0)


@pytest.mark.parametrize("text", ["a +", "", "   ", "(a || b", "a b", "a || b |_ c", "+ a"])
def test_malformed_terms(text):
    with pytest.raises(PASyntaxError):
        parse_term(text)


def test_syntax_error_carries_position():
    with pytest.raises(PASyntaxError) as info:
        parse_term("a + + b")
    assert info.value.position == 4


def test_format_examples():
    assert format_term(Plus(a, Seq(b, d))) == "a + b . d"
    assert format_term(Seq(Par(a, b), d)) == "(a || b) . d"
    assert format_term(a) == "a"


def test_format_associativity():
    assert format_term(Seq(Seq(a, b), c)) == "a . b . c"
    assert format_term(Seq(a, Seq(b, c))) == "a . (b . c)"
    assert format_term(Par(Par(a, b), c)) == "a || b || c"
    assert format_term(Par(a, Par(b, c))) == "a || (b || c)"
    assert format_term(LeftMerge(Par(a, b), c)) == "(a || b) |_ c"


def test_system_of():
    assert system_of(parse_term("a || b + c")) == PA1
    assert system_of(parse_term("a . (b | c)")) == PA2


terms = st.recursive(
    st.sampled_from([a, b, c, d]),
    lambda children: st.builds(
        lambda op, left, right: op(left, right),
        st.sampled_from([Plus, Seq, Par, LeftMerge, CommMerge]), children, children),
    max_leaves=8,
)


@given(terms)
@settings(max_examples=300)
def test_format_parse_round_trip(term):
    assert parse_term(format_term(term), PA2) == term


@given(terms)
@settings(max_examples=100)
def test_redundant_parentheses_are_harmless(term):
    assert parse_term(f"(({format_term(term)}))", PA2) == term


@given(st.text(alphabet="ab()+.|_ x1", max_size=20))
@settings(max_examples=300)
def test_arbitrary_text_parses_or_raises_syntax_error(text):
    try:
        term = parse_term(text, PA2)
    except PASyntaxError:
        return
    assert parse_term(format_term(term), PA2) == term


CFG0_TEXT = """
# reference config
alphabet=a,b,c,d
gamma a b = c
order=a<b<c<d
policy=optional
"""


def test_load_config():
    config = load_config(CFG0_TEXT)
    assert config.alphabet == ("a", "b", "c", "d")
    assert config.communicate("a", "b") == "c"
    assert config.communicate("b", "a") == "c"
    assert config.communicate("a", "a") is None
    assert config.leq("a", "b") and not config.leq("b", "a")
    assert config.policy == "optional"
    assert config.causality == "sequential"


def test_load_config_semicolons():
    config = load_config("alphabet=x,y; order=y<x; policy=forced; causality=synchronous")
    assert config.alphabet == ("y", "x")
    assert config.less("y", "x")
    assert config.policy == "forced"
    assert config.causality == "synchronous"


@pytest.mark.parametrize("text", [
    "alphabet=a,b; order=a<b; gamma a b = a; gamma b a = b",
    "alphabet=a,b; order=a<b; gamma a b = a; gamma a b = a",
    "alphabet=a,b; order=a<b; policy=optional; policy=forced",
    "alphabet=a,b",
    "alphabet=a,b; order=a<c",
    "alphabet=a,b; order=a<b; gamma a b = z",
    "alphabet=a,b; order=a<b; colour=blue",
    "order=a<b",
    "alphabet=a,b; order=a<b; policy=sometimes",
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        load_config(text)


def test_config_rejects_asymmetric_gamma():
    with pytest.raises(ConfigError):
        SemanticsConfig(alphabet=("a", "b"), gamma=(("a", "b", "a"),))


def test_permissive_config_collects_labels():
    config = permissive_config("b . a + b")
    assert config.alphabet == ("a", "b")
    assert config.gamma == ()
