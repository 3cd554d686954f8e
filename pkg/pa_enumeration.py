"""
Bounded generators of closed terms
Deterministic enumeration, dynamic-programming counts and a size-stratified sampler
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, List, Optional, Tuple

from pa_syntax import (PA1, PA2, SYSTEMS, Atom, CommMerge, ConfigError, LeftMerge,
                       Par, Plus, Seq, Term, LABEL_PATTERN)

NO_DEDUP = "none"
MODULO_AC = "modulo-AC"
DEDUP_MODES = (NO_DEDUP, MODULO_AC)

CONSTRUCTORS = {
    PA1: (Plus, Seq, Par),
    PA2: (Plus, Seq, Par, LeftMerge, CommMerge),
}


@dataclass(frozen=True)
class EnumSpec:
    """Which terms to enumerate; size is the AST node count"""

    system: str
    alphabet: Tuple[str, ...]
    max_size: int
    dedup: str = NO_DEDUP

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        if self.system not in SYSTEMS:
            raise ConfigError(f"unknown system {self.system!r}")
        if self.max_size < 1:
            raise ConfigError(f"max_size must be at least 1, got {self.max_size}")
        if self.dedup not in DEDUP_MODES:
            raise ConfigError(f"unknown dedup mode {self.dedup!r}; use none or modulo-AC")
        if not self.alphabet:
            raise ConfigError("enumeration alphabet is empty")
        for label in self.alphabet:
            if not LABEL_PATTERN.fullmatch(label):
                raise ConfigError(f"invalid event label {label!r}")

    @property
    def constructors(self):
        return CONSTRUCTORS[self.system]


@lru_cache(maxsize=None)
def _terms_of_size(system: str, alphabet: Tuple[str, ...], size: int) -> Tuple[Term, ...]:
    if size == 1:
        return tuple(Atom(label) for label in alphabet)
    found: List[Term] = []
    for op in CONSTRUCTORS[system]:
        for left_size in range(1, size - 1):
            right_size = size - 1 - left_size
            for left in _terms_of_size(system, alphabet, left_size):
                for right in _terms_of_size(system, alphabet, right_size):
                    found.append(op(left, right))
    return tuple(found)


def ac_key(term: Term) -> str:
    """Canonical text of `term` with + and || chains flattened and sorted"""
    if isinstance(term, (Plus, Par)):
        operands = []
        pending = [term]
        while pending:
            node = pending.pop()
            if type(node) is type(term):
                pending.extend((node.left, node.right))
            else:
                operands.append(ac_key(node))
        return f"{term.symbol}[" + ",".join(sorted(operands)) + "]"
    if term.children():
        return f"{term.symbol}(" + ",".join(ac_key(child) for child in term.children()) + ")"
    return term.leaf_text()


def enum_terms(spec: EnumSpec) -> Iterator[Term]:
    """
    Every closed term of size <= spec.max_size, each exactly once

    Sizes ascend; within a size the order is constructor (+, ., ||, |_, |),
    then left size, then left and right in their own enumeration order.
    Under modulo-AC only the first representative of each class is kept.
    """
    seen = set()
    for size in range(1, spec.max_size + 1):
        for term in _terms_of_size(spec.system, spec.alphabet, size):
            if spec.dedup == MODULO_AC:
                key = ac_key(term)
                if key in seen:
                    continue
                seen.add(key)
            yield term


@lru_cache(maxsize=None)
def _count_of_size(constructors: int, letters: int, size: int) -> int:
    if size == 1:
        return letters
    return constructors * sum(_count_of_size(constructors, letters, i) *
                              _count_of_size(constructors, letters, size - 1 - i)
                              for i in range(1, size - 1))


def count_terms(spec: EnumSpec) -> int:
    if spec.dedup == MODULO_AC:
        # AC classes flatten nested + and || across sizes, so there is no
        # per-size recurrence; counting walks the deduplicated enumeration.
        return sum(1 for _ in enum_terms(spec))
    k = len(spec.constructors)
    return sum(_count_of_size(k, len(spec.alphabet), size) for size in range(1, spec.max_size + 1))


def _unrank(spec: EnumSpec, size: int, index: int) -> Term:
    """The index-th term of exactly `size` nodes, in enumeration order"""
    letters = len(spec.alphabet)
    k = len(spec.constructors)
    if size == 1:
        return Atom(spec.alphabet[index])
    per_op = _count_of_size(k, letters, size) // k
    op = spec.constructors[index // per_op]
    index %= per_op
    for left_size in range(1, size - 1):
        right_size = size - 1 - left_size
        rights = _count_of_size(k, letters, right_size)
        block = _count_of_size(k, letters, left_size) * rights
        if index < block:
            return op(_unrank(spec, left_size, index // rights),
                      _unrank(spec, right_size, index % rights))
        index -= block
    raise IndexError(f"no term of size {size} at that rank")


def sample_terms(spec: EnumSpec, count: int, rng: Optional[random.Random] = None) -> List[Term]:
    """
    Size-stratified sample: a size is drawn uniformly among the inhabited
    sizes, then a term uniformly among the terms of that size
    """
    rng = rng or random.Random(0)
    k = len(spec.constructors)
    sizes = [n for n in range(1, spec.max_size + 1)
             if _count_of_size(k, len(spec.alphabet), n) > 0]
    if spec.dedup == MODULO_AC:
        by_size = {}
        for term in enum_terms(spec):
            by_size.setdefault(term.size(), []).append(term)
        return [rng.choice(by_size[rng.choice(sorted(by_size))]) for _ in range(count)]

    sample = []
    for _ in range(count):
        size = rng.choice(sizes)
        sample.append(_unrank(spec, size, rng.randrange(_count_of_size(k, len(spec.alphabet), size))))
    return sample
