"""
Tests for the bounded term enumerator
"""

import random

import pytest

from pa_enumeration import (MODULO_AC, NO_DEDUP, EnumSpec, _unrank, ac_key, count_terms,
                            enum_terms, sample_terms)
from pa_syntax import PA1, PA2, ConfigError, format_term, parse_term


def texts(spec):
    return [format_term(t) for t in enum_terms(spec)]


def test_smallest_pa1_terms():
    assert texts(EnumSpec(PA1, ("a",), 3)) == ["a", "a + a", "a . a", "a || a"]


@pytest.mark.parametrize("system, alphabet, size, expected", [
    (PA1, ("a",), 3, 4),
    (PA1, ("a", "b"), 3, 14),
    (PA2, ("a",), 3, 6),
    (PA1, ("a",), 5, 4 + 2 * 3 * 3),
])
def test_counts(system, alphabet, size, expected):
    spec = EnumSpec(system, alphabet, size)
    assert count_terms(spec) == expected
    assert sum(1 for _ in enum_terms(spec)) == expected


def test_even_sizes_are_empty():
    assert count_terms(EnumSpec(PA1, ("a", "b"), 2)) == 2


def test_terms_are_unique_and_sized():
    spec = EnumSpec(PA2, ("a", "b"), 5)
    terms = list(enum_terms(spec))
    assert len(set(terms)) == len(terms)
    sizes = [t.size() for t in terms]
    assert sizes == sorted(sizes)
    assert max(sizes) == 5


def test_enumeration_is_deterministic():
    spec = EnumSpec(PA2, ("a", "b"), 5)
    assert texts(spec) == texts(spec)


def test_modulo_ac():
    spec = EnumSpec(PA1, ("a", "b"), 3, MODULO_AC)
    assert count_terms(spec) == 12
    found = texts(spec)
    assert "a + b" in found and "b + a" not in found
    assert "a || b" in found and "b || a" not in found
    assert "b . a" in found


def test_ac_key():
    assert ac_key(parse_term("a + (b + c)")) == ac_key(parse_term("(c + a) + b"))
    assert ac_key(parse_term("a || (b || c)")) == ac_key(parse_term("c || (b || a)"))
    assert ac_key(parse_term("a . b")) != ac_key(parse_term("b . a"))
    assert ac_key(parse_term("a |_ b")) != ac_key(parse_term("b |_ a"))


def test_sampler():
    spec = EnumSpec(PA2, ("a", "b"), 7)
    first = sample_terms(spec, 30, random.Random(3))
    assert first == sample_terms(spec, 30, random.Random(3))
    assert all(t.size() <= 7 for t in first)
    assert {t.size() for t in first} <= {1, 3, 5, 7}


def test_sampler_modulo_ac():
    spec = EnumSpec(PA1, ("a", "b"), 3, MODULO_AC)
    allowed = {ac_key(t) for t in enum_terms(spec)}
    assert all(ac_key(t) in allowed for t in sample_terms(spec, 20))


@pytest.mark.parametrize("system", [PA1, PA2])
def test_rank_order_matches_enumeration(system):
    spec = EnumSpec(system, ("a", "b"), 5)
    terms = list(enum_terms(spec))
    for size in (1, 3, 5):
        of_size = [term for term in terms if term.size() == size]
        assert [_unrank(spec, size, i) for i in range(len(of_size))] == of_size


@pytest.mark.parametrize("dedup", [NO_DEDUP, MODULO_AC])
def test_counts_and_samples_agree_with_enumeration(dedup):
    spec = EnumSpec(PA2, ("a", "b"), 5, dedup)
    terms = list(enum_terms(spec))
    assert count_terms(spec) == len(terms)
    members = {ac_key(term) for term in terms}
    assert all(ac_key(term) in members for term in sample_terms(spec, 50, random.Random(11)))


@pytest.mark.parametrize("kwargs", [
    dict(system="PA3", alphabet=("a",), max_size=3),
    dict(system=PA1, alphabet=("a",), max_size=0),
    dict(system=PA1, alphabet=(), max_size=3),
    dict(system=PA1, alphabet=("1a",), max_size=3),
    dict(system=PA1, alphabet=("a",), max_size=3, dedup="sorted"),
])
def test_rejects_bad_specs(kwargs):
    with pytest.raises(ConfigError):
        EnumSpec(**kwargs)
