"""
Tests for run pomsets and their canonical codes
"""

import pytest

from pa_pomsets import Pomset, canonical_pomset, pomset_transitions
from pa_semantics import TERM, Occurrence, init_state
from pa_settings import BudgetExceededError
from pa_syntax import PA1, parse_term


def chain(*labels, start=0):
    occurrences = []
    for offset, label in enumerate(labels):
        ident = (start + offset,)
        causes = frozenset({(start + offset - 1,)}) if offset else frozenset()
        occurrences.append(Occurrence(ident, label, causes))
    return occurrences


def test_order_is_transitively_closed():
    pomset = Pomset.from_occurrences(chain("a", "b", "c"))
    assert pomset.order == {((0,), (1,)), ((1,), (2,)), ((0,), (2,))}
    assert len(pomset) == 3


def test_causes_outside_the_window_are_dropped():
    pomset = Pomset.from_occurrences(chain("a", "b")[1:])
    assert pomset.order == frozenset()
    assert pomset.label_of((1,)) == "b"


def test_canonical_code_ignores_identities():
    first = Pomset.from_occurrences(chain("a", "b") + [Occurrence((9,), "c")])
    second = Pomset.from_occurrences([Occurrence((5,), "c")] + chain("a", "b", start=7))
    assert canonical_pomset(first) == canonical_pomset(second)


def test_canonical_code_separates_order():
    discrete = Pomset.from_occurrences([Occurrence((0,), "a"), Occurrence((1,), "d")])
    ordered = Pomset.from_occurrences(chain("a", "d"))
    reversed_ = Pomset.from_occurrences(chain("d", "a"))
    codes = {canonical_pomset(p) for p in (discrete, ordered, reversed_)}
    assert len(codes) == 3


def test_canonical_code_separates_attachment():
    # a < b with c free, against c < b with a free
    left = Pomset.from_occurrences(chain("a", "b") + [Occurrence((5,), "c")])
    right = Pomset.from_occurrences(
        [Occurrence((0,), "c"), Occurrence((1,), "b", frozenset({(0,)})), Occurrence((2,), "a")])
    assert canonical_pomset(left) != canonical_pomset(right)


def test_pomset_budget():
    pomset = Pomset.from_occurrences(chain(*("a" * 13)))
    with pytest.raises(BudgetExceededError):
        canonical_pomset(pomset, budget=12)


def test_transitions_of_a_sequence(cfg_empty):
    found = pomset_transitions(init_state(parse_term("a . b")), PA1, cfg_empty)
    assert [len(pomset) for pomset, _ in found] == [1, 2]
    assert found[1][0].order == {((0,), (1,))}
    assert found[1][1] is TERM


def test_parallel_step_is_one_discrete_pomset(cfg_empty):
    found = pomset_transitions(init_state(parse_term("a || d")), PA1, cfg_empty)
    assert len(found) == 1
    pomset, target = found[0]
    assert pomset.order == frozenset()
    assert sorted(label for _, label in pomset.labels) == ["a", "d"]
    assert target is TERM
