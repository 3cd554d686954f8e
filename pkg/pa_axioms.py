"""
Axiom systems of PA1 and PA2
Schemas and their instantiation, oriented rewriting to basic terms and the
canonical normal forms the completeness check compares
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from functools import cached_property, lru_cache, reduce
from typing import (Callable, Dict, Iterator, List, Mapping, Optional, Sequence,
                    Tuple, Union)

from pa_semantics import Step, compose_steps
from pa_settings import DEFAULT_BUDGETS, BudgetExceededError, Budgets
from pa_syntax import (OPTIONAL, PA1, PA2, Atom, CommMerge, LeftMerge, Nil,
                       PA2_ONLY, Par, PAError, Plus, SemanticsConfig, Seq,
                       StepAtom, Term, check_system, format_term, iter_subterms)

logger = logging.getLogger(__name__)

GAMMA_FOLD = "gamma"
LITERAL_FOLD = "literal"
FOLD_MODES = (GAMMA_FOLD, LITERAL_FOLD)

# memoized is_normal results; sweeps normalize millions of distinct subterms
IS_NORMAL_CACHE_SIZE = 1 << 16

# side conditions
LEQ = "leq"
NOT_LEQ = "nleq"
GAMMA_DEFINED = "gamma"
GAMMA_UNDEFINED = "nogamma"


class IllTypedSubstitutionError(PAError):
    """A PA2 operator substituted into a PA1 schema"""


# ---------------------------------------------------------------------------
# Schema patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True, repr=False)
class Var(Term):
    """Term variable x, y, z"""

    name: str

    def leaf_text(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Var({self.name!r})"


@dataclass(frozen=True, repr=False)
class EventVar(Term):
    """Event metavariable e1, e2"""

    name: str

    def leaf_text(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"EventVar({self.name!r})"


@dataclass(frozen=True, repr=False)
class GammaOf(Term):
    first: str
    second: str

    def leaf_text(self) -> str:
        return f"gamma({self.first},{self.second})"

    def __repr__(self) -> str:
        return f"GammaOf({self.first!r}, {self.second!r})"


@dataclass(frozen=True)
class AxiomSchema:
    name: str
    lhs: Term
    rhs: Term
    side_condition: Optional[str] = None
    system: str = PA1
    derived: bool = False

    def __post_init__(self):
        missing = set(_names(self.rhs, Var)) - set(_names(self.lhs, Var))
        if missing:
            raise ValueError(f"{self.name}: right-hand side uses unbound {sorted(missing)}")

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(sorted(set(_names(self.lhs, Var))))

    @property
    def event_variables(self) -> Tuple[str, ...]:
        found = set(_names(self.lhs, EventVar)) | set(_names(self.rhs, EventVar))
        for node in iter_subterms(self.rhs):
            if isinstance(node, GammaOf):
                found |= {node.first, node.second}
        return tuple(sorted(found))

    def describe(self) -> str:
        condition = f"({self.side_condition}) " if self.side_condition else ""
        return f"{self.name}: {condition}{format_term(self.lhs)} = {format_term(self.rhs)}"


def _names(term: Term, kind: type) -> Iterator[str]:
    for node in iter_subterms(term):
        if isinstance(node, kind):
            yield node.name


x, y, z = Var("x"), Var("y"), Var("z")
e1, e2 = EventVar("e1"), EventVar("e2")
g12 = GammaOf("e1", "e2")
NIL_TERM = Nil()

_COMMON = [
    AxiomSchema("A1", Plus(x, y), Plus(y, x)),
    AxiomSchema("A2", Plus(Plus(x, y), z), Plus(x, Plus(y, z))),
    AxiomSchema("A3", Plus(x, x), x),
    AxiomSchema("A4", Seq(Plus(x, y), z), Plus(Seq(x, z), Seq(y, z))),
    AxiomSchema("A5", Seq(Seq(x, y), z), Seq(x, Seq(y, z))),
]

_PA1_PARALLEL = [
    AxiomSchema("P1", Par(x, y), Par(y, x)),
    AxiomSchema("P2", Par(Par(x, y), z), Par(x, Par(y, z))),
    AxiomSchema("P3", Par(e1, Seq(e2, y)), Seq(Par(e1, e2), y)),
    AxiomSchema("P4", Par(Seq(e1, x), e2), Seq(Par(e1, e2), x)),
    AxiomSchema("P5", Par(Seq(e1, x), Seq(e2, y)), Seq(Par(e1, e2), Par(x, y))),
    AxiomSchema("P6", Par(Plus(x, y), z), Plus(Par(x, z), Par(y, z))),
    AxiomSchema("P7", Par(x, Plus(y, z)), Plus(Par(x, y), Par(x, z))),
]

_PA2_MERGES = [
    AxiomSchema("P1", Par(x, y), Plus(Plus(LeftMerge(x, y), LeftMerge(y, x)), CommMerge(x, y)),
                system=PA2),
    AxiomSchema("L2", LeftMerge(e1, Seq(e2, y)), Seq(LeftMerge(e1, e2), y), LEQ, PA2),
    AxiomSchema("L3", LeftMerge(Seq(e1, x), e2), Seq(LeftMerge(e1, e2), x), LEQ, PA2),
    AxiomSchema("L4", LeftMerge(Seq(e1, x), Seq(e2, y)), Seq(LeftMerge(e1, e2), Par(x, y)), LEQ, PA2),
    AxiomSchema("L5", LeftMerge(Plus(x, y), z), Plus(LeftMerge(x, z), LeftMerge(y, z)), system=PA2),
    AxiomSchema("C6", CommMerge(e1, e2), g12, GAMMA_DEFINED, PA2),
    AxiomSchema("C7", CommMerge(e1, Seq(e2, y)), Seq(g12, y), GAMMA_DEFINED, PA2),
    AxiomSchema("C8", CommMerge(Seq(e1, x), e2), Seq(g12, x), GAMMA_DEFINED, PA2),
    # the whole-parallel operator of C9's right-hand side is read as ||
    AxiomSchema("C9", CommMerge(Seq(e1, x), Seq(e2, y)), Seq(g12, Par(x, y)), GAMMA_DEFINED, PA2),
    AxiomSchema("C10", CommMerge(Plus(x, y), z), Plus(CommMerge(x, z), CommMerge(y, z)), system=PA2),
    AxiomSchema("C11", CommMerge(x, Plus(y, z)), Plus(CommMerge(x, y), CommMerge(x, z)), system=PA2),
]


def _derived(name: str, lhs: Term, rhs: Term, condition: Optional[str] = None) -> AxiomSchema:
    return AxiomSchema(name, lhs, rhs, condition, PA2, derived=True)


_PA2_DERIVED = [
    _derived("L6", LeftMerge(x, Plus(y, z)), Plus(LeftMerge(x, y), LeftMerge(x, z))),
    _derived("L0a", LeftMerge(e1, e2), NIL_TERM, NOT_LEQ),
    _derived("L0b", LeftMerge(e1, Seq(e2, y)), NIL_TERM, NOT_LEQ),
    _derived("L0c", LeftMerge(Seq(e1, x), e2), NIL_TERM, NOT_LEQ),
    _derived("L0d", LeftMerge(Seq(e1, x), Seq(e2, y)), NIL_TERM, NOT_LEQ),
    _derived("C0a", CommMerge(e1, e2), NIL_TERM, GAMMA_UNDEFINED),
    _derived("C0b", CommMerge(e1, Seq(e2, y)), NIL_TERM, GAMMA_UNDEFINED),
    _derived("C0c", CommMerge(Seq(e1, x), e2), NIL_TERM, GAMMA_UNDEFINED),
    _derived("C0d", CommMerge(Seq(e1, x), Seq(e2, y)), NIL_TERM, GAMMA_UNDEFINED),
    _derived("Z+l", Plus(NIL_TERM, x), x),
    _derived("Z+r", Plus(x, NIL_TERM), x),
    _derived("Z.", Seq(NIL_TERM, x), NIL_TERM),
    _derived("Z||l", Par(NIL_TERM, x), NIL_TERM),
    _derived("Z||r", Par(x, NIL_TERM), NIL_TERM),
    _derived("Z|_l", LeftMerge(NIL_TERM, x), NIL_TERM),
    _derived("Z|_r", LeftMerge(x, NIL_TERM), NIL_TERM),
    _derived("Z|l", CommMerge(NIL_TERM, x), NIL_TERM),
    _derived("Z|r", CommMerge(x, NIL_TERM), NIL_TERM),
]


def axiom_schemas(system: str, include_derived: bool = False) -> List[AxiomSchema]:
    """
    The axiom table of `system`

    PA1: A1-A5, P1-P7. PA2: A1-A5, P1 (expansion into merges), L2-L5, C6-C11.
    Derived rules used by the normalizer for stuck subterms are PA2 only.
    """
    if system == PA1:
        return list(_COMMON) + list(_PA1_PARALLEL)
    if system == PA2:
        common = [AxiomSchema(s.name, s.lhs, s.rhs, s.side_condition, PA2) for s in _COMMON]
        schemas = common + list(_PA2_MERGES)
        if include_derived:
            schemas += _PA2_DERIVED
        return schemas
    check_system(Nil(), system)
    return []


SKIP = None


def _side_condition_holds(condition: Optional[str], events: Mapping[str, str],
                          config: SemanticsConfig) -> bool:
    if condition is None:
        return True
    first, second = events["e1"], events["e2"]
    if condition == LEQ:
        return config.leq(first, second)
    if condition == NOT_LEQ:
        return not config.leq(first, second)
    if condition == GAMMA_DEFINED:
        return config.communicate(first, second) is not None
    if condition == GAMMA_UNDEFINED:
        return config.communicate(first, second) is None
    raise ValueError(f"unknown side condition {condition!r}")


def instantiate(schema: AxiomSchema, subst: Mapping[str, Term], events: Mapping[str, str],
                config: SemanticsConfig) -> Optional[Tuple[Term, Term]]:
    """
    Substitute closed terms for x, y, z and labels for e1, e2

    Returns:
        (lhs, rhs), or SKIP when the side condition fails
    """
    if schema.system == PA1:
        for name, term in subst.items():
            if any(isinstance(node, PA2_ONLY) for node in iter_subterms(term)):
                raise IllTypedSubstitutionError(
                    f"{schema.name}: {name} := {format_term(term)} uses a PA2 operator")
    missing = [v for v in schema.variables if v not in subst]
    missing += [v for v in schema.event_variables if v not in events]
    if missing:
        raise PAError(f"{schema.name}: no value for {', '.join(missing)}")
    if not _side_condition_holds(schema.side_condition, events, config):
        return SKIP

    def fill(node: Term) -> Term:
        if isinstance(node, Var):
            return subst[node.name]
        if isinstance(node, EventVar):
            return Atom(events[node.name])
        if isinstance(node, GammaOf):
            return Atom(config.communicate(events[node.first], events[node.second]))
        if node.children():
            return node.rebuild(*(fill(child) for child in node.children()))
        return node

    return fill(schema.lhs), fill(schema.rhs)


# ---------------------------------------------------------------------------
# Normal forms
# ---------------------------------------------------------------------------

class _Terminal:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __reduce__(self):
        return (_Terminal, ())

    def __repr__(self) -> str:
        return "TERMINAL"


TERMINAL = _Terminal()

Tail = Union["NormalForm", _Terminal]


def _step_text(step: Step) -> str:
    if step.is_singleton():
        return step.labels[0]
    return "{" + ",".join(step.labels) + "}"


@dataclass(frozen=True)
class NormalForm:
    """
    A sum of step-prefixed continuations, deduplicated and sorted by code

    The empty sum is NIL, the empty process; it never sits beside other summands.
    """

    summands: Tuple[Tuple[Step, Tail], ...] = ()

    @classmethod
    def of(cls, summands: Sequence[Tuple[Step, Tail]]) -> "NormalForm":
        unique = {_summand_code(step, tail): (step, tail) for step, tail in summands}
        return cls(tuple(unique[code] for code in sorted(unique)))

    @property
    def is_nil(self) -> bool:
        return not self.summands

    @cached_property
    def code(self) -> str:
        if self.is_nil:
            return "0"
        return " + ".join(_summand_code(step, tail) for step, tail in self.summands)

    def __str__(self) -> str:
        return self.code


def _summand_code(step: Step, tail: Tail) -> str:
    head = _step_text(step)
    if tail is TERMINAL:
        return head
    if len(tail.summands) > 1:
        return f"{head} . ({tail.code})"
    return f"{head} . {tail.code}"


NIL = NormalForm()


def nf_fingerprint(nf: NormalForm) -> str:
    """Same encoding as the step fingerprint of the tree the normal form denotes"""

    def encode(tail: Tail) -> str:
        if tail is TERMINAL:
            return "T"
        return "{" + ",".join(sorted({f"{step}>{encode(rest)}" for step, rest in tail.summands})) + "}"

    return encode(nf)


def _leaf(step: Step) -> Term:
    if step.is_singleton():
        return Atom(step.labels[0])
    return StepAtom(step.labels)


def _sum(terms: Sequence[Term]) -> Term:
    return reduce(Plus, terms)


def nf_to_term(nf: NormalForm) -> Term:
    """The normal form as a term over atoms and step atoms; NIL maps to the empty process"""
    if nf.is_nil:
        return Nil()
    return _sum([_leaf(step) if tail is TERMINAL else Seq(_leaf(step), nf_to_term(tail))
                 for step, tail in nf.summands])


@lru_cache(maxsize=IS_NORMAL_CACHE_SIZE)
def is_normal(term: Term) -> bool:
    """Basic terms: 0, steps, step . basic, and sums of nonzero basic terms"""
    if isinstance(term, (Nil, Atom, StepAtom)):
        return True
    if isinstance(term, Seq):
        return isinstance(term.left, (Atom, StepAtom)) and is_normal(term.right)
    if isinstance(term, Plus):
        return (not isinstance(term.left, Nil) and not isinstance(term.right, Nil)
                and is_normal(term.left) and is_normal(term.right))
    return False


def _step_of(leaf: Term) -> Step:
    if isinstance(leaf, Atom):
        return Step.of(leaf.label)
    return Step(leaf.events)


def _fold(term: Term) -> NormalForm:
    if isinstance(term, Nil):
        return NIL
    if isinstance(term, (Atom, StepAtom)):
        return NormalForm.of([(_step_of(term), TERMINAL)])
    if isinstance(term, Seq):
        return NormalForm.of([(_step_of(term.left), _fold(term.right))])
    if isinstance(term, Plus):
        return NormalForm.of(_fold(term.left).summands + _fold(term.right).summands)
    raise PAError(f"cannot fold non-basic term {format_term(term)}")


# ---------------------------------------------------------------------------
# Rewriting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Context:
    system: str
    config: SemanticsConfig
    fold: str


Rewrite = Optional[Tuple[str, Term]]


def _prefix(term: Term) -> Optional[Tuple[Term, Optional[Term]]]:
    """(head step, continuation) of `s` or `s . t`; None for anything else"""
    if isinstance(term, (Atom, StepAtom)):
        return term, None
    if isinstance(term, Seq) and isinstance(term.left, (Atom, StepAtom)):
        return term.left, term.right
    return None


def _shape(left_tail: Optional[Term], right_tail: Optional[Term]) -> str:
    """Which of the four prefix combinations: a (leaves), b, c or d (both prefixed)"""
    return "abcd"[(left_tail is not None) * 2 + (right_tail is not None)]


def _nil_rules(node: Term) -> Rewrite:
    left, right = node.children()
    suffix = {Plus: "+", Par: "||", LeftMerge: "|_", CommMerge: "|"}[type(node)]
    if isinstance(node, Plus):
        if isinstance(left, Nil):
            return "Z+l", right
        if isinstance(right, Nil):
            return "Z+r", left
        return None
    if isinstance(left, Nil):
        return f"Z{suffix}l", Nil()
    if isinstance(right, Nil):
        return f"Z{suffix}r", Nil()
    return None


def _seq_rules(node: Seq, ctx: _Context) -> Rewrite:
    left = node.left
    if isinstance(left, Nil):
        return "Z.", Nil()
    if isinstance(left, Plus):
        return "A4", Plus(Seq(left.left, node.right), Seq(left.right, node.right))
    if isinstance(left, Seq):
        return "A5", Seq(left.left, Seq(left.right, node.right))
    return None


def _initial_steps_singleton(term: Term) -> bool:
    if isinstance(term, Plus):
        return _initial_steps_singleton(term.left) and _initial_steps_singleton(term.right)
    head = _prefix(term)
    return head is not None and isinstance(head[0], Atom)


def _expands_by_merges(node: Par, ctx: _Context) -> bool:
    return (ctx.system == PA2 and ctx.config.policy == OPTIONAL
            and is_normal(node.left) and is_normal(node.right)
            and _initial_steps_singleton(node.left) and _initial_steps_singleton(node.right))


def _fold_steps(first: Term, second: Term, ctx: _Context) -> Term:
    s1, s2 = _step_of(first), _step_of(second)
    if ctx.fold == LITERAL_FOLD:
        return _leaf(Step(s1.labels + s2.labels))
    return _sum([_leaf(step) for step in sorted(compose_steps(s1, s2, ctx.config))])


def _par_rules(node: Par, ctx: _Context) -> Rewrite:
    rewrite = _nil_rules(node)
    if rewrite is not None:
        return rewrite
    left, right = node.left, node.right
    if _expands_by_merges(node, ctx):
        return "P1", Plus(Plus(LeftMerge(left, right), LeftMerge(right, left)), CommMerge(left, right))
    if isinstance(left, Plus):
        return "P6", Plus(Par(left.left, right), Par(left.right, right))
    if isinstance(right, Plus):
        return "P7", Plus(Par(left, right.left), Par(left, right.right))
    lp, rp = _prefix(left), _prefix(right)
    if lp is None or rp is None:
        return None
    (h1, x_tail), (h2, y_tail) = lp, rp
    prime = "'" if isinstance(h1, StepAtom) or isinstance(h2, StepAtom) else ""
    shape = _shape(x_tail, y_tail)
    if shape == "a":
        return "step-fold", _fold_steps(h1, h2, ctx)
    if shape == "b":
        return "P3" + prime, Seq(Par(h1, h2), y_tail)
    if shape == "c":
        return "P4" + prime, Seq(Par(h1, h2), x_tail)
    return "P5" + prime, Seq(Par(h1, h2), Par(x_tail, y_tail))


def _merge_operands(node: Term) -> Optional[Tuple[str, str, Optional[Term], Optional[Term], str]]:
    lp, rp = _prefix(node.left), _prefix(node.right)
    if lp is None or rp is None:
        return None
    (h1, x_tail), (h2, y_tail) = lp, rp
    shape = _shape(x_tail, y_tail)
    if not isinstance(h1, Atom) or not isinstance(h2, Atom):
        return "", "", x_tail, y_tail, shape
    return h1.label, h2.label, x_tail, y_tail, shape


def _left_merge_rules(node: LeftMerge, ctx: _Context) -> Rewrite:
    rewrite = _nil_rules(node)
    if rewrite is not None:
        return rewrite
    if isinstance(node.left, Plus):
        return "L5", Plus(LeftMerge(node.left.left, node.right), LeftMerge(node.left.right, node.right))
    if isinstance(node.right, Plus):
        return "L6", Plus(LeftMerge(node.left, node.right.left), LeftMerge(node.left, node.right.right))
    operands = _merge_operands(node)
    if operands is None:
        return None
    first, second, x_tail, y_tail, shape = operands
    if not first or not ctx.config.leq(first, second):
        return f"L0{shape}", Nil()
    head = LeftMerge(Atom(first), Atom(second))
    if shape == "a":
        return "step-fold", StepAtom((first, second))
    if shape == "b":
        return "L2", Seq(head, y_tail)
    if shape == "c":
        return "L3", Seq(head, x_tail)
    return "L4", Seq(head, Par(x_tail, y_tail))


def _comm_merge_rules(node: CommMerge, ctx: _Context) -> Rewrite:
    rewrite = _nil_rules(node)
    if rewrite is not None:
        return rewrite
    if isinstance(node.left, Plus):
        return "C10", Plus(CommMerge(node.left.left, node.right), CommMerge(node.left.right, node.right))
    if isinstance(node.right, Plus):
        return "C11", Plus(CommMerge(node.left, node.right.left), CommMerge(node.left, node.right.right))
    operands = _merge_operands(node)
    if operands is None:
        return None
    first, second, x_tail, y_tail, shape = operands
    label = ctx.config.communicate(first, second) if first else None
    if label is None:
        return f"C0{shape}", Nil()
    if shape == "a":
        return "C6", Atom(label)
    if shape == "b":
        return "C7", Seq(Atom(label), y_tail)
    if shape == "c":
        return "C8", Seq(Atom(label), x_tail)
    return "C9", Seq(Atom(label), Par(x_tail, y_tail))


_RULES: Dict[type, Callable[[Term, _Context], Rewrite]] = {
    Plus: lambda node, ctx: _nil_rules(node),
    Seq: _seq_rules,
    Par: _par_rules,
    LeftMerge: _left_merge_rules,
    CommMerge: _comm_merge_rules,
}


def _first_rule(node: Term, ctx: _Context) -> Rewrite:
    rules = _RULES.get(type(node))
    return rules(node, ctx) if rules is not None else None


Position = Tuple[int, ...]


def _redexes(term: Term, ctx: _Context, path: Position = ()) -> Iterator[Tuple[Position, str, Term]]:
    """Rewritable positions in post-order (leftmost-innermost first)"""
    for index, child in enumerate(term.children()):
        yield from _redexes(child, ctx, path + (index,))
    rewrite = _first_rule(term, ctx)
    if rewrite is not None:
        yield (path,) + rewrite


def subterm_at(term: Term, path: Position) -> Term:
    for index in path:
        term = term.children()[index]
    return term


def _replace(term: Term, path: Position, new: Term) -> Term:
    if not path:
        return new
    children = list(term.children())
    children[path[0]] = _replace(children[path[0]], path[1:], new)
    return term.rebuild(*children)


@dataclass(frozen=True)
class RuleApplication:
    rule: str
    position: Position

    def describe(self) -> str:
        where = ".".join(map(str, self.position)) or "root"
        return f"{self.rule} @ {where}"


@dataclass(frozen=True)
class RewriteReport:
    input: Term
    nf: NormalForm
    rule_trace: Tuple[RuleApplication, ...]
    system: str
    config: SemanticsConfig
    fold: str = GAMMA_FOLD
    basic_term: Optional[Term] = field(default=None, compare=False)

    @property
    def policy(self) -> str:
        return self.config.policy

    def to_dict(self) -> dict:
        return {
            "input": format_term(self.input),
            "normal_form": self.nf.code,
            "system": self.system,
            "policy": self.config.policy,
            "causality": self.config.causality,
            "fold": self.fold,
            "config": self.config.describe(),
            "trace": [{"rule": step.rule, "position": list(step.position)}
                      for step in self.rule_trace],
        }


def _check_fold(fold: str) -> None:
    if fold not in FOLD_MODES:
        raise PAError(f"unknown fold mode {fold!r}; use gamma or literal")


def normalize(term: Term, system: str, config: SemanticsConfig,
              budgets: Budgets = DEFAULT_BUDGETS, fold: str = GAMMA_FOLD,
              strategy: Optional[random.Random] = None) -> RewriteReport:
    """
    Rewrite `term` to a basic term and fold it into its normal form

    Args:
        term: closed term of `system`
        system: PA1 or PA2
        config: communication function, event order and policy
        budgets: `budgets.rewrites` caps the number of rule applications
        fold: "gamma" resolves parallel step atoms with the communication
            function; "literal" only unions their events
        strategy: when given, each rewrite picks a random redex with it
            instead of the leftmost-innermost one

    Returns:
        RewriteReport with the rule trace that reproduces the normal form
    """
    check_system(term, system)
    _check_fold(fold)
    ctx = _Context(system, config, fold)
    current = term
    trace: List[RuleApplication] = []

    while True:
        if strategy is None:
            redex = next(_redexes(current, ctx), None)
        else:
            candidates = list(_redexes(current, ctx))
            redex = strategy.choice(candidates) if candidates else None
        if redex is None:
            break
        if len(trace) >= budgets.rewrites:
            raise BudgetExceededError(
                f"normalizing {format_term(term)} exceeds the rewrite budget of {budgets.rewrites}")
        path, rule, replacement = redex
        trace.append(RuleApplication(rule, path))
        current = _replace(current, path, replacement)

    nf = _fold(current)
    logger.debug("normalize %s: %d rewrites, NF %s", format_term(term), len(trace), nf.code)
    return RewriteReport(term, nf, tuple(trace), system, config, fold, basic_term=current)


def replay(term: Term, trace: Sequence[RuleApplication], system: str, config: SemanticsConfig,
           fold: str = GAMMA_FOLD) -> NormalForm:
    """Re-apply a recorded rule trace; every entry must name the rule that fires there"""
    _check_fold(fold)
    ctx = _Context(system, config, fold)
    current = term
    for step in trace:
        try:
            node = subterm_at(current, step.position)
        except IndexError:
            raise PAError(f"trace position {step.describe()} does not exist") from None
        rewrite = _first_rule(node, ctx)
        if rewrite is None or rewrite[0] != step.rule:
            raise PAError(f"rule {step.describe()} does not apply to {format_term(node)}")
        current = _replace(current, step.position, rewrite[1])
    return _fold(current)
