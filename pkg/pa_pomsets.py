"""
Pomsets of executed runs
Window pomsets of run prefixes and isomorphism-invariant canonical codes
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx

from pa_semantics import TERM, Occurrence, OccurrenceId, RunState, steps
from pa_settings import DEFAULT_POMSET_BUDGET, BudgetExceededError
from pa_syntax import SemanticsConfig


@dataclass(frozen=True)
class Pomset:
    """Labelled strict partial order; `order` holds (earlier, later) pairs"""

    labels: Tuple[Tuple[OccurrenceId, str], ...]
    order: FrozenSet[Tuple[OccurrenceId, OccurrenceId]]

    @classmethod
    def from_occurrences(cls, occurrences: Iterable[Occurrence]) -> "Pomset":
        """Order = transitive closure of `causes`, restricted to the given occurrences"""
        occurrences = list(occurrences)
        members = {o.ident for o in occurrences}
        graph = nx.DiGraph()
        graph.add_nodes_from(members)
        graph.add_edges_from((cause, o.ident) for o in occurrences
                             for cause in o.causes if cause in members)
        closure = nx.transitive_closure_dag(graph)
        return cls(labels=tuple(sorted((o.ident, o.label) for o in occurrences)),
                   order=frozenset(closure.edges()))

    def __len__(self) -> int:
        return len(self.labels)

    def label_of(self, ident: OccurrenceId) -> str:
        return dict(self.labels)[ident]

    def describe(self) -> str:
        names = {ident: f"{label}{n}" for n, (ident, label) in enumerate(self.labels)}
        pairs = sorted(f"{names[lo]}<{names[hi]}" for lo, hi in self.order)
        return "{" + ", ".join(names[i] for i, _ in self.labels) + (
            " | " + ", ".join(pairs) if pairs else "") + "}"


def pomset_transitions(state: RunState, system: str,
                       config: SemanticsConfig) -> List[Tuple[Pomset, RunState]]:
    """
    One entry per nonempty run prefix from `state`: the pomset of the
    occurrences it fires, paired with the state it ends in
    """
    found: List[Tuple[Pomset, RunState]] = []

    def explore(current: RunState, fired: Tuple[Occurrence, ...]) -> None:
        for transition in steps(current, system, config):
            window = fired + transition.occurrences
            found.append((Pomset.from_occurrences(window), transition.target))
            if transition.target is not TERM:
                explore(transition.target, window)

    explore(state, ())
    return found


def canonical_pomset(pomset: Pomset, budget: int = DEFAULT_POMSET_BUDGET) -> str:
    """
    Code that is equal for two pomsets iff they are isomorphic

    Occurrences are slotted by (level, label, in-degree, out-degree); the code
    is the lexicographically least adjacency encoding over all slot-respecting
    arrangements, found by backtracking with prefix pruning.
    """
    size = len(pomset)
    if size > budget:
        raise BudgetExceededError(f"pomset of {size} occurrences exceeds the budget of {budget}")

    labels = dict(pomset.labels)
    preds: Dict[OccurrenceId, Set[OccurrenceId]] = {ident: set() for ident in labels}
    succs: Dict[OccurrenceId, Set[OccurrenceId]] = {ident: set() for ident in labels}
    for lo, hi in pomset.order:
        preds[hi].add(lo)
        succs[lo].add(hi)

    level: Dict[OccurrenceId, int] = {}

    def depth(ident: OccurrenceId) -> int:
        if ident not in level:
            level[ident] = 1 + max((depth(p) for p in preds[ident]), default=-1)
        return level[ident]

    signature = {ident: (depth(ident), labels[ident], len(preds[ident]), len(succs[ident]))
                 for ident in labels}
    slots = sorted(signature.values())
    candidates = {sig: sorted(i for i in labels if signature[i] == sig) for sig in set(slots)}
    best: Optional[Tuple[Tuple[int, ...], ...]] = None

    def search(position: int, placed: Tuple[OccurrenceId, ...],
               rows: Tuple[Tuple[int, ...], ...]) -> None:
        nonlocal best
        if position == size:
            best = rows
            return
        for ident in candidates[slots[position]]:
            if ident in placed:
                continue
            row = tuple(1 if earlier in preds[ident] else 0 for earlier in placed)
            extended = rows + (row,)
            if best is not None and extended > best[:position + 1]:
                continue
            search(position + 1, placed + (ident,), extended)

    search(0, (), ())
    rows = best or ()
    return ";".join(f"{slot[1]}:{''.join(map(str, row))}" for slot, row in zip(slots, rows))
