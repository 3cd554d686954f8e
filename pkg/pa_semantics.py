"""
Structural operational semantics of PA1 and PA2
Decorated run states with causal guards, step transitions, LTS construction and export
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx

from pa_settings import DEFAULT_BUDGETS, BudgetExceededError, Budgets
from pa_syntax import (FORCED, PA1, SYNCHRONOUS, Atom, CommMerge, LeftMerge,
                       Nil, OperatorNotInSystemError, Par, PAError, Plus,
                       SemanticsConfig, Seq, StepAtom, Term, check_system,
                       format_term)

logger = logging.getLogger(__name__)

OccurrenceId = Tuple[int, ...]


@dataclass(frozen=True, order=True)
class Step:
    """A nonempty multiset of event labels fired in one transition"""

    labels: Tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("a step fires at least one event")
        object.__setattr__(self, "labels", tuple(sorted(self.labels)))

    @classmethod
    def of(cls, *labels: str) -> "Step":
        return cls(tuple(labels))

    def is_singleton(self) -> bool:
        return len(self.labels) == 1

    def __str__(self) -> str:
        return "+".join(self.labels)


@dataclass(frozen=True)
class Occurrence:
    """
    One fired event. Atom occurrences are identified by the atom's position
    id; a communication joins the ids of both partners.
    """

    ident: OccurrenceId
    label: str
    causes: FrozenSet[OccurrenceId] = frozenset()


class _Terminated:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __reduce__(self):
        return (_Terminated, ())

    def __repr__(self) -> str:
        return "TERM"


TERM = _Terminated()


@dataclass(frozen=True)
class Decorated:
    """
    A live residual subterm. `guard` holds the occurrences that causally
    precede everything this node will still fire.
    """

    op: type
    children: Tuple["Decorated", ...] = ()
    label: Optional[str] = None
    events: Tuple[str, ...] = ()
    idents: Tuple[int, ...] = ()
    guard: FrozenSet[OccurrenceId] = frozenset()


RunState = Union[Decorated, _Terminated]


@dataclass(frozen=True)
class Transition:
    step: Step
    occurrences: Tuple[Occurrence, ...]
    target: RunState


# ---------------------------------------------------------------------------
# Run states
# ---------------------------------------------------------------------------

def init_state(term: Term) -> Decorated:
    """Decorate `term` with empty guards and fresh atom ids (preorder)"""
    counter = itertools.count()

    def decorate(node: Term) -> Decorated:
        if isinstance(node, Atom):
            return Decorated(Atom, label=node.label, idents=(next(counter),))
        if isinstance(node, StepAtom):
            return Decorated(StepAtom, events=node.events,
                             idents=tuple(next(counter) for _ in node.events))
        if isinstance(node, Nil):
            return Decorated(Nil)
        if not node.children():
            raise PAError(f"cannot execute open term {format_term(node)}")
        left = decorate(node.left)
        right = decorate(node.right)
        return Decorated(type(node), children=(left, right))

    return decorate(term)


def erase(state: RunState) -> Union[Term, _Terminated]:
    """Drop guards and ids; the LTS quotients states by this image"""
    if state is TERM:
        return TERM
    if state.op is Atom:
        return Atom(state.label)
    if state.op is StepAtom:
        return StepAtom(state.events)
    if state.op is Nil:
        return Nil()
    left, right = state.children
    return state.op(erase(left), erase(right))


def add_guard(state: RunState, idents: Iterable[OccurrenceId]) -> RunState:
    idents = frozenset(idents)
    if state is TERM or not idents or idents <= state.guard:
        return state
    return replace(state, guard=state.guard | idents)


def describe_state(state: RunState) -> str:
    if state is TERM:
        return "TERM"
    return format_term(erase(state))


# ---------------------------------------------------------------------------
# Communication
# ---------------------------------------------------------------------------

def _matchings(left: Sequence[str], right: Sequence[str],
               config: SemanticsConfig) -> List[Tuple[Tuple[int, int], ...]]:
    """Sets of disjoint cross pairs whose labels communicate"""
    pairs = [(i, j) for i, e1 in enumerate(left) for j, e2 in enumerate(right)
             if config.communicate(e1, e2) is not None]
    found: List[Tuple[Tuple[int, int], ...]] = []

    def extend(k: int, chosen: Tuple[Tuple[int, int], ...],
               used_left: FrozenSet[int], used_right: FrozenSet[int]) -> None:
        if k == len(pairs):
            found.append(chosen)
            return
        i, j = pairs[k]
        extend(k + 1, chosen, used_left, used_right)
        if i not in used_left and j not in used_right:
            extend(k + 1, chosen + ((i, j),), used_left | {i}, used_right | {j})

    extend(0, (), frozenset(), frozenset())

    if config.policy == FORCED:
        def maximal(matching):
            used_left = {i for i, _ in matching}
            used_right = {j for _, j in matching}
            return not any(i not in used_left and j not in used_right for i, j in pairs)
        found = [matching for matching in found if maximal(matching)]
    return found


def compose_steps(x_step: Step, y_step: Step, config: SemanticsConfig) -> FrozenSet[Step]:
    """
    Labels of a joint parallel step

    Each matching replaces its pairs by gamma(e1, e2) and keeps the rest.
    Under policy=forced only maximal matchings count.
    """
    result = set()
    for matching in _matchings(x_step.labels, y_step.labels, config):
        used_left = {i for i, _ in matching}
        used_right = {j for _, j in matching}
        labels = [config.communicate(x_step.labels[i], y_step.labels[j]) for i, j in matching]
        labels += [e for i, e in enumerate(x_step.labels) if i not in used_left]
        labels += [e for j, e in enumerate(y_step.labels) if j not in used_right]
        result.add(Step(tuple(labels)))
    return frozenset(result)


def _communicate(o1: Occurrence, o2: Occurrence, label: str) -> Occurrence:
    return Occurrence(tuple(sorted(o1.ident + o2.ident)), label, o1.causes | o2.causes)


def _compose_occurrences(x_occs: Tuple[Occurrence, ...], y_occs: Tuple[Occurrence, ...],
                         config: SemanticsConfig) -> List[Tuple[Occurrence, ...]]:
    composed = []
    x_labels = [o.label for o in x_occs]
    y_labels = [o.label for o in y_occs]
    for matching in _matchings(x_labels, y_labels, config):
        used_left = {i for i, _ in matching}
        used_right = {j for _, j in matching}
        occs = [_communicate(x_occs[i], y_occs[j], config.communicate(x_labels[i], y_labels[j]))
                for i, j in matching]
        occs += [o for i, o in enumerate(x_occs) if i not in used_left]
        occs += [o for j, o in enumerate(y_occs) if j not in used_right]
        composed.append(tuple(sorted(occs, key=lambda o: o.ident)))
    return composed


# ---------------------------------------------------------------------------
# Transition rules
# ---------------------------------------------------------------------------

_Fired = List[Tuple[Tuple[Occurrence, ...], RunState]]


def _join(node: Decorated, x_target: RunState, y_target: RunState,
          occs: Tuple[Occurrence, ...], config: SemanticsConfig) -> RunState:
    """Residual of a joint step; both sides continue as a parallel composite"""
    if config.causality == SYNCHRONOUS:
        fired = [o.ident for o in occs]
        x_target = add_guard(x_target, fired)
        y_target = add_guard(y_target, fired)
    if x_target is TERM and y_target is TERM:
        return TERM
    if x_target is TERM:
        return add_guard(y_target, node.guard)
    if y_target is TERM:
        return add_guard(x_target, node.guard)
    return Decorated(Par, children=(x_target, y_target), guard=node.guard)


def _fire(node: Decorated, config: SemanticsConfig, ambient: FrozenSet[OccurrenceId]) -> _Fired:
    causes = ambient | node.guard
    op = node.op

    if op is Atom:
        return [((Occurrence((node.idents[0],), node.label, causes),), TERM)]
    if op is StepAtom:
        occs = tuple(Occurrence((i,), e, causes) for i, e in zip(node.idents, node.events))
        return [(occs, TERM)]
    if op is Nil:
        return []

    left, right = node.children
    result: _Fired = []

    if op is Plus:
        for child in (left, right):
            for occs, target in _fire(child, config, causes):
                result.append((occs, add_guard(target, node.guard)))
        return result

    if op is Seq:
        for occs, target in _fire(left, config, causes):
            rest = add_guard(right, (o.ident for o in occs))
            if target is TERM:
                result.append((occs, add_guard(rest, node.guard)))
            else:
                result.append((occs, replace(node, children=(target, rest))))
        return result

    x_fired = _fire(left, config, causes)
    y_fired = _fire(right, config, causes) if x_fired else []

    if op is Par:
        for x_occs, x_target in x_fired:
            for y_occs, y_target in y_fired:
                for occs in _compose_occurrences(x_occs, y_occs, config):
                    result.append((occs, _join(node, x_target, y_target, occs, config)))
        return result

    if op is LeftMerge:
        for x_occs, x_target in x_fired:
            if len(x_occs) != 1:
                continue
            for y_occs, y_target in y_fired:
                if len(y_occs) != 1 or not config.leq(x_occs[0].label, y_occs[0].label):
                    continue
                occs = tuple(sorted(x_occs + y_occs, key=lambda o: o.ident))
                result.append((occs, _join(node, x_target, y_target, occs, config)))
        return result

    if op is CommMerge:
        for x_occs, x_target in x_fired:
            if len(x_occs) != 1:
                continue
            for y_occs, y_target in y_fired:
                if len(y_occs) != 1:
                    continue
                label = config.communicate(x_occs[0].label, y_occs[0].label)
                if label is None:
                    continue
                occs = (_communicate(x_occs[0], y_occs[0], label),)
                result.append((occs, _join(node, x_target, y_target, occs, config)))
        return result

    raise PAError(f"no transition rules for {op.__name__}")


def _require_pa1(state: Decorated) -> None:
    if state.op in (LeftMerge, CommMerge):
        raise OperatorNotInSystemError(f"{state.op.__name__} is not part of PA1")
    for child in state.children:
        _require_pa1(child)


def _transition_key(transition: Transition):
    return (transition.step,
            tuple(o.ident for o in transition.occurrences),
            describe_state(transition.target))


def steps(state: RunState, system: str, config: SemanticsConfig) -> List[Transition]:
    """
    Every derivable transition of `state`, deterministically ordered

    An empty list for a non-TERM state means the state is stuck (PA2 only).
    """
    if state is TERM:
        return []
    if system == PA1:
        _require_pa1(state)
    unique: Dict[Tuple, Transition] = {}
    for occs, target in _fire(state, config, frozenset()):
        key = (occs, target)
        if key not in unique:
            unique[key] = Transition(Step(tuple(o.label for o in occs)), occs, target)
    return sorted(unique.values(), key=_transition_key)


# ---------------------------------------------------------------------------
# Labelled transition systems
# ---------------------------------------------------------------------------

class Lts:
    """
    Finite acyclic step-labelled transition system of a closed term

    States are numbered in discovery order; state 0 is initial. Each state
    carries the erased residual term (or TERM) under the node attribute "term".
    """

    def __init__(self, graph: nx.MultiDiGraph, initial: int = 0):
        self.graph = graph
        self.initial = initial
        self._successors: Dict[int, List[Tuple[Step, int]]] = {}

    def state(self, index: int):
        return self.graph.nodes[index]["term"]

    def is_terminal(self, index: int) -> bool:
        return self.state(index) is TERM

    def successors(self, index: int) -> List[Tuple[Step, int]]:
        if index not in self._successors:
            self._successors[index] = sorted(
                (step, target) for _, target, step in self.graph.out_edges(index, keys=True))
        return self._successors[index]

    @property
    def states(self) -> List[int]:
        return list(self.graph.nodes)

    @property
    def state_count(self) -> int:
        return self.graph.number_of_nodes()

    @property
    def stuck(self) -> List[int]:
        return [i for i in self.graph.nodes
                if not self.is_terminal(i) and self.graph.out_degree(i) == 0]

    def edges(self) -> List[Tuple[int, Step, int]]:
        return sorted((source, step, target)
                      for source, target, step in self.graph.edges(keys=True))

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self.graph)


def build_lts(term: Term, system: str, config: SemanticsConfig,
              budgets: Budgets = DEFAULT_BUDGETS) -> Lts:
    """Exhaustive forward closure of `steps` from init_state(term)"""
    check_system(term, system)
    graph = nx.MultiDiGraph()
    index = {term: 0}
    graph.add_node(0, term=term)
    queue = deque([term])

    while queue:
        current = queue.popleft()
        if current is TERM:
            continue
        source = index[current]
        for transition in steps(init_state(current), system, config):
            target = erase(transition.target)
            if target not in index:
                if len(index) >= budgets.states:
                    raise BudgetExceededError(
                        f"LTS of {format_term(term)} exceeds the state budget of {budgets.states}")
                index[target] = len(index)
                graph.add_node(index[target], term=target)
                queue.append(target)
            destination = index[target]
            if not graph.has_edge(source, destination, key=transition.step):
                graph.add_edge(source, destination, key=transition.step)

    logger.debug("LTS of %s: %d states, %d edges",
                 format_term(term), graph.number_of_nodes(), graph.number_of_edges())
    return Lts(graph)


def lts_to_json(lts: Lts) -> dict:
    return {
        "states": [describe_state_term(lts.state(i)) for i in lts.states],
        "edges": [{"from": source, "label": list(step.labels), "to": target}
                  for source, step, target in lts.edges()],
        "initial": lts.initial,
        "stuck": lts.stuck,
    }


def describe_state_term(term) -> str:
    return "TERM" if term is TERM else format_term(term)


def lts_to_dot(lts: Lts) -> str:
    """DOT text: states numbered, TERM double-circled, edges labelled a+b"""
    from networkx.drawing.nx_pydot import to_pydot

    drawing = nx.MultiDiGraph(name="lts")
    for i in lts.states:
        shape = "doublecircle" if lts.is_terminal(i) else "circle"
        drawing.add_node(str(i), shape=shape, label=str(i),
                         tooltip=f'"{describe_state_term(lts.state(i))}"')
    for source, step, target in lts.edges():
        drawing.add_edge(str(source), str(target), label=f'"{step}"')
    return to_pydot(drawing).to_string()
