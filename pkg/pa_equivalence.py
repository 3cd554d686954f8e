"""
Truly concurrent bisimulation equivalences on closed terms
Step, pomset, history-preserving and hereditary history-preserving bisimulation,
plus the step-fingerprint oracle
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from pa_pomsets import Pomset, canonical_pomset, pomset_transitions
from pa_semantics import (TERM, Lts, Occurrence, OccurrenceId, RunState,
                          Transition, build_lts, erase, init_state, steps)
from pa_settings import DEFAULT_BUDGETS, BudgetExceededError, Budgets
from pa_syntax import ConfigError, SemanticsConfig, Term, check_system, format_term

logger = logging.getLogger(__name__)


class EquivalenceKind(Enum):
    STEP = "step"
    POMSET = "pomset"
    HP = "hp"
    HHP = "hhp"

    @classmethod
    def parse(cls, text: str) -> "EquivalenceKind":
        aliases = {"s": cls.STEP, "p": cls.POMSET}
        key = text.strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown relation {text!r}; use s, p, hp or hhp") from None

    @property
    def symbol(self) -> str:
        return {"step": "~s", "pomset": "~p", "hp": "~hp", "hhp": "~hhp"}[self.value]


@dataclass(frozen=True)
class Verdict:
    relation: EquivalenceKind
    equivalent: bool
    witness: Optional[Tuple[str, ...]] = None

    def to_dict(self) -> dict:
        return {
            "relation": self.relation.value,
            "equivalent": self.equivalent,
            "witness": list(self.witness) if self.witness is not None else None,
        }


# ---------------------------------------------------------------------------
# Step bisimulation and the fingerprint oracle
# ---------------------------------------------------------------------------

def _step_distinction(lts1: Lts, lts2: Lts) -> Optional[List[str]]:
    memo: Dict[Tuple[int, int], Optional[List[str]]] = {}

    def distinguish(i: int, j: int) -> Optional[List[str]]:
        if (i, j) in memo:
            return memo[(i, j)]
        result: Optional[List[str]] = None
        if lts1.is_terminal(i) != lts2.is_terminal(j):
            side = "left" if lts1.is_terminal(i) else "right"
            result = [f"{side} has terminated, the other side has not"]
        if result is None:
            for step, i2 in lts1.successors(i):
                answers = [distinguish(i2, j2) for s, j2 in lts2.successors(j) if s == step]
                if all(a is not None for a in answers):
                    tail = min(answers, key=len) if answers else []
                    result = [f"left fires {step}"] + tail
                    break
        if result is None:
            for step, j2 in lts2.successors(j):
                answers = [distinguish(i2, j2) for s, i2 in lts1.successors(i) if s == step]
                if all(a is not None for a in answers):
                    tail = min(answers, key=len) if answers else []
                    result = [f"right fires {step}"] + tail
                    break
        memo[(i, j)] = result
        return result

    return distinguish(lts1.initial, lts2.initial)


def step_verdict(t1: Term, t2: Term, system: str, config: SemanticsConfig,
                 budgets: Budgets = DEFAULT_BUDGETS) -> Verdict:
    lts1 = build_lts(t1, system, config, budgets)
    lts2 = build_lts(t2, system, config, budgets)
    witness = _step_distinction(lts1, lts2)
    return Verdict(EquivalenceKind.STEP, witness is None,
                   tuple(witness) if witness is not None else None)


def step_bisim(t1: Term, t2: Term, system: str, config: SemanticsConfig,
               budgets: Budgets = DEFAULT_BUDGETS) -> bool:
    return step_verdict(t1, t2, system, config, budgets).equivalent


def step_bisim_witness(t1: Term, t2: Term, system: str, config: SemanticsConfig,
                       budgets: Budgets = DEFAULT_BUDGETS) -> Optional[Tuple[str, ...]]:
    """Distinguishing sequence of step moves, or None when the terms are step-bisimilar"""
    return step_verdict(t1, t2, system, config, budgets).witness


def lts_fingerprint(lts: Lts) -> str:
    memo: Dict[int, str] = {}

    def fingerprint(i: int) -> str:
        if i not in memo:
            if lts.is_terminal(i):
                memo[i] = "T"
            else:
                children = {f"{step}>{fingerprint(j)}" for step, j in lts.successors(i)}
                memo[i] = "{" + ",".join(sorted(children)) + "}"
        return memo[i]

    return fingerprint(lts.initial)


def step_fingerprint(term: Term, system: str, config: SemanticsConfig,
                     budgets: Budgets = DEFAULT_BUDGETS) -> str:
    """
    Canonical encoding of the bisimulation-collapsed step tree

    TERM encodes as "T", any other state as the sorted set of its
    "step>child" pairs, so a stuck state is "{}".
    """
    return lts_fingerprint(build_lts(term, system, config, budgets))


# ---------------------------------------------------------------------------
# Pomset bisimulation
# ---------------------------------------------------------------------------

class _PomsetGame:
    def __init__(self, system: str, config: SemanticsConfig, budgets: Budgets):
        self.system = system
        self.config = config
        self.budgets = budgets
        self._moves: Dict[object, Tuple[Tuple[str, object], ...]] = {}
        self._related: Dict[Tuple[object, object], Optional[List[str]]] = {}

    def moves(self, term) -> Tuple[Tuple[str, object], ...]:
        """Distinct (pomset code, residual) moves in a fixed order"""
        if term not in self._moves:
            if term is TERM:
                self._moves[term] = ()
            else:
                found = pomset_transitions(init_state(term), self.system, self.config)
                distinct = {(canonical_pomset(p, self.budgets.pomset), erase(target))
                            for p, target in found}
                self._moves[term] = tuple(sorted(distinct, key=_move_key))
        return self._moves[term]

    def distinguish(self, s, t) -> Optional[List[str]]:
        key = (s, t)
        if key in self._related:
            return self._related[key]
        result: Optional[List[str]] = None
        if (s is TERM) != (t is TERM):
            result = ["one side has terminated, the other side has not"]
        for side, mine, theirs in (("left", s, t), ("right", t, s)):
            if result is not None:
                break
            for code, target in self.moves(mine):
                answers = []
                for other_code, other_target in self.moves(theirs):
                    if other_code != code:
                        continue
                    pair = (target, other_target) if side == "left" else (other_target, target)
                    answers.append(self.distinguish(*pair))
                if all(a is not None for a in answers):
                    tail = min(answers, key=len) if answers else []
                    result = [f"{side} performs pomset [{code}]"] + tail
                    break
        self._related[key] = result
        return result


def _move_key(move):
    code, target = move
    if target is TERM:
        return (code, "", "")
    return (code, format_term(target), repr(target))


def pomset_verdict(t1: Term, t2: Term, system: str, config: SemanticsConfig,
                   budgets: Budgets = DEFAULT_BUDGETS) -> Verdict:
    check_system(t1, system)
    check_system(t2, system)
    witness = _PomsetGame(system, config, budgets).distinguish(t1, t2)
    return Verdict(EquivalenceKind.POMSET, witness is None,
                   tuple(witness) if witness is not None else None)


def pomset_bisim(t1: Term, t2: Term, system: str, config: SemanticsConfig,
                 budgets: Budgets = DEFAULT_BUDGETS) -> bool:
    return pomset_verdict(t1, t2, system, config, budgets).equivalent


# ---------------------------------------------------------------------------
# Posetal triples: hp- and hhp-bisimulation
# ---------------------------------------------------------------------------

Configuration = FrozenSet[Occurrence]


@dataclass(frozen=True)
class PosetalTriple:
    """Two executed configurations and the order isomorphism `mapping` between them"""

    left: Configuration
    mapping: FrozenSet[Tuple[OccurrenceId, OccurrenceId]]
    right: Configuration

    def left_pomset(self) -> Pomset:
        return Pomset.from_occurrences(self.left)

    def right_pomset(self) -> Pomset:
        return Pomset.from_occurrences(self.right)


EMPTY_TRIPLE = PosetalTriple(frozenset(), frozenset(), frozenset())


def _history(configuration: Configuration) -> Dict[OccurrenceId, FrozenSet[OccurrenceId]]:
    """Strict causal predecessors of every occurrence, inside the configuration"""
    by_id = {o.ident: o for o in configuration}
    below: Dict[OccurrenceId, FrozenSet[OccurrenceId]] = {}

    def down(ident: OccurrenceId) -> FrozenSet[OccurrenceId]:
        if ident not in below:
            direct = [c for c in by_id[ident].causes if c in by_id]
            result: Set[OccurrenceId] = set(direct)
            for cause in direct:
                result |= down(cause)
            below[ident] = frozenset(result)
        return below[ident]

    for ident in by_id:
        down(ident)
    return below


class _ConfigurationSpace:
    """All run-reachable configurations of one term, with their residual states"""

    def __init__(self, term: Term, system: str, config: SemanticsConfig, budgets: Budgets):
        self.system = system
        self.config = config
        self.states: Dict[Configuration, RunState] = {}
        self._moves: Dict[Configuration, List[Transition]] = {}
        self._budget = budgets.states
        self._explore(frozenset(), init_state(term))

    def _explore(self, configuration: Configuration, state: RunState) -> None:
        pending = [(configuration, state)]
        while pending:
            current, current_state = pending.pop()
            if current in self.states:
                continue
            if len(self.states) >= self._budget:
                raise BudgetExceededError(
                    f"configuration space exceeds the state budget of {self._budget}")
            self.states[current] = current_state
            for transition in self.moves(current):
                pending.append((current | frozenset(transition.occurrences), transition.target))

    def moves(self, configuration: Configuration) -> List[Transition]:
        """Transitions of a reachable configuration; none for unreachable ones"""
        if configuration not in self._moves:
            state = self.states.get(configuration)
            if state is None or state is TERM:
                self._moves[configuration] = []
            else:
                self._moves[configuration] = steps(state, self.system, self.config)
        return self._moves[configuration]

    def is_terminal(self, configuration: Configuration) -> bool:
        return self.states.get(configuration) is TERM


@dataclass
class _TripleGame:
    left: _ConfigurationSpace
    right: _ConfigurationSpace
    _matches: Dict[PosetalTriple, Dict[Tuple[int, int], List[PosetalTriple]]] = field(
        default_factory=dict)

    def matches(self, triple: PosetalTriple) -> Dict[Tuple[int, int], List[PosetalTriple]]:
        """Successor triples for every pair of equally labelled moves (by move index)"""
        if triple not in self._matches:
            left_moves = self.left.moves(triple.left)
            right_moves = self.right.moves(triple.right)
            found: Dict[Tuple[int, int], List[PosetalTriple]] = {}
            for (i, t1), (j, t2) in itertools.product(enumerate(left_moves), enumerate(right_moves)):
                if t1.step == t2.step:
                    extensions = _extensions(triple, t1, t2)
                    if extensions:
                        found[(i, j)] = extensions
            self._matches[triple] = found
        return self._matches[triple]

    def move_counts(self, triple: PosetalTriple) -> Tuple[int, int]:
        return len(self.left.moves(triple.left)), len(self.right.moves(triple.right))

    def terminal_mismatch(self, triple: PosetalTriple) -> bool:
        return self.left.is_terminal(triple.left) != self.right.is_terminal(triple.right)

    def describe_move(self, triple: PosetalTriple, side: str, index: int) -> str:
        space = self.left if side == "left" else self.right
        configuration = triple.left if side == "left" else triple.right
        return f"{side} fires {space.moves(configuration)[index].step}"


def _extensions(triple: PosetalTriple, t1: Transition, t2: Transition) -> List[PosetalTriple]:
    """Label-preserving bijections between the fired steps that keep the mapping an isomorphism"""
    left = triple.left | frozenset(t1.occurrences)
    right = triple.right | frozenset(t2.occurrences)
    below_left = _history(left)
    below_right = _history(right)
    mapping = dict(triple.mapping)
    found = []
    seen = set()
    for image in itertools.permutations(t2.occurrences):
        pairs = tuple(zip(t1.occurrences, image))
        if any(a.label != b.label for a, b in pairs):
            continue
        if all(frozenset(mapping[x] for x in below_left[a.ident]) == below_right[b.ident]
               for a, b in pairs):
            extended = triple.mapping | frozenset((a.ident, b.ident) for a, b in pairs)
            if extended not in seen:
                seen.add(extended)
                found.append(PosetalTriple(left, extended, right))
    return found


def _backtracks(triple: PosetalTriple) -> List[PosetalTriple]:
    """Triples obtained by removing one matched pair of maximal occurrences"""
    below = _history(triple.left)
    covered = set().union(*below.values()) if below else set()
    by_left = {o.ident: o for o in triple.left}
    by_right = {o.ident: o for o in triple.right}
    shrunk = []
    for a, b in sorted(triple.mapping):
        if a in covered:
            continue
        shrunk.append(PosetalTriple(triple.left - {by_left[a]},
                                    triple.mapping - {(a, b)},
                                    triple.right - {by_right[b]}))
    return shrunk


def _forward_violation(game: _TripleGame, triple: PosetalTriple, alive) -> Optional[str]:
    """First unanswered move from `triple`, given which successor triples count as winning"""
    if game.terminal_mismatch(triple):
        return "one side has terminated, the other side has not"
    matches = game.matches(triple)
    left_count, right_count = game.move_counts(triple)
    for i in range(left_count):
        if not any(alive(t) for (a, _), ts in matches.items() if a == i for t in ts):
            return game.describe_move(triple, "left", i)
    for j in range(right_count):
        if not any(alive(t) for (_, b), ts in matches.items() if b == j for t in ts):
            return game.describe_move(triple, "right", j)
    return None


def _spaces(t1: Term, t2: Term, system: str, config: SemanticsConfig,
            budgets: Budgets) -> _TripleGame:
    check_system(t1, system)
    check_system(t2, system)
    return _TripleGame(_ConfigurationSpace(t1, system, config, budgets),
                       _ConfigurationSpace(t2, system, config, budgets))


def hp_verdict(t1: Term, t2: Term, system: str, config: SemanticsConfig,
               budgets: Budgets = DEFAULT_BUDGETS) -> Verdict:
    """
    History-preserving game over posetal triples

    Moves are whole SOS steps; the defender answers with an equally labelled
    step and a bijection extending the isomorphism between the histories.
    """
    game = _spaces(t1, t2, system, config, budgets)
    memo: Dict[PosetalTriple, Optional[List[str]]] = {}

    def losing(triple: PosetalTriple) -> Optional[List[str]]:
        if triple in memo:
            return memo[triple]
        reason = _forward_violation(game, triple, lambda t: losing(t) is None)
        result = None
        if reason is not None:
            result = [reason]
        memo[triple] = result
        return result

    witness = losing(EMPTY_TRIPLE)
    return Verdict(EquivalenceKind.HP, witness is None,
                   tuple(witness) if witness is not None else None)


def hp_bisim(t1: Term, t2: Term, system: str, config: SemanticsConfig,
             budgets: Budgets = DEFAULT_BUDGETS) -> bool:
    return hp_verdict(t1, t2, system, config, budgets).equivalent


def hhp_verdict(t1: Term, t2: Term, system: str, config: SemanticsConfig,
                budgets: Budgets = DEFAULT_BUDGETS) -> Verdict:
    """
    Greatest fixpoint over the triple universe

    The universe is closed under forward matches and backtracking of matched
    maximal pairs. Triples that fail a forward match or whose backtrack was
    deleted are removed until nothing changes.
    """
    game = _spaces(t1, t2, system, config, budgets)
    universe: List[PosetalTriple] = []
    known: Set[PosetalTriple] = set()
    backtracks: Dict[PosetalTriple, List[PosetalTriple]] = {}
    pending = [EMPTY_TRIPLE]
    while pending:
        triple = pending.pop()
        if triple in known:
            continue
        if len(known) >= budgets.states:
            raise BudgetExceededError(f"triple universe exceeds the state budget of {budgets.states}")
        known.add(triple)
        universe.append(triple)
        backtracks[triple] = _backtracks(triple)
        pending.extend(backtracks[triple])
        for successors in game.matches(triple).values():
            pending.extend(successors)

    alive = set(universe)
    deletions: List[str] = []
    changed = True
    while changed:
        changed = False
        for triple in universe:
            if triple not in alive:
                continue
            reason = _forward_violation(game, triple, alive.__contains__)
            if reason is None:
                for shrunk in backtracks[triple]:
                    if shrunk not in alive:
                        removed = sorted(set(triple.left) - set(shrunk.left), key=lambda o: o.ident)
                        reason = f"backtracking {removed[0].label} leaves no matching history"
                        break
            if reason is not None:
                alive.discard(triple)
                deletions.append(f"after {len(triple.left)} events: {reason}")
                changed = True

    logger.debug("hhp universe of %d triples, %d deleted", len(universe), len(deletions))
    if EMPTY_TRIPLE in alive:
        return Verdict(EquivalenceKind.HHP, True)
    return Verdict(EquivalenceKind.HHP, False, tuple(deletions[-8:]))


def hhp_bisim(t1: Term, t2: Term, system: str, config: SemanticsConfig,
              budgets: Budgets = DEFAULT_BUDGETS) -> bool:
    return hhp_verdict(t1, t2, system, config, budgets).equivalent


_DECIDERS = {
    EquivalenceKind.STEP: step_verdict,
    EquivalenceKind.POMSET: pomset_verdict,
    EquivalenceKind.HP: hp_verdict,
    EquivalenceKind.HHP: hhp_verdict,
}


def decide(kind: EquivalenceKind, t1: Term, t2: Term, system: str,
           config: SemanticsConfig, budgets: Budgets = DEFAULT_BUDGETS) -> Verdict:
    return _DECIDERS[kind](t1, t2, system, config, budgets)


def equivalent(kind: EquivalenceKind, t1: Term, t2: Term, system: str,
               config: SemanticsConfig, budgets: Budgets = DEFAULT_BUDGETS) -> bool:
    return decide(kind, t1, t2, system, config, budgets).equivalent
