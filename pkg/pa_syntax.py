"""
Process terms for the parallel algebras PA1 and PA2
Abstract syntax, semantic configuration, text grammar, parsing and printing
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterator, Optional, Tuple

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedEOF, UnexpectedInput, VisitError

logger = logging.getLogger(__name__)

PA1 = "PA1"
PA2 = "PA2"
SYSTEMS = (PA1, PA2)

OPTIONAL = "optional"
FORCED = "forced"
POLICIES = (OPTIONAL, FORCED)

SEQUENTIAL = "sequential"
SYNCHRONOUS = "synchronous"
CAUSALITIES = (SEQUENTIAL, SYNCHRONOUS)

LABEL_PATTERN = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class PAError(Exception):
    """Base class for every error the workbench raises on bad input or budgets"""


class PASyntaxError(PAError):
    """Malformed term text; `position` is a 0-based character offset"""

    def __init__(self, message: str, position: Optional[int] = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnknownLabelError(PAError):
    pass


class OperatorNotInSystemError(PAError):
    pass


class ConfigError(PAError):
    pass


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

class Term:
    """Base class of process terms; every concrete term is a frozen dataclass"""

    def children(self) -> Tuple["Term", ...]:
        return ()

    def size(self) -> int:
        """AST node count: atoms count 1, binary nodes 1 + both sides"""
        return 1 + sum(child.size() for child in self.children())

    def labels(self) -> Iterator[str]:
        for child in self.children():
            yield from child.labels()

    def leaf_text(self) -> str:
        raise NotImplementedError(type(self).__name__)

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True, repr=False)
class Atom(Term):
    label: str

    def labels(self) -> Iterator[str]:
        yield self.label

    def leaf_text(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"Atom({self.label!r})"


@dataclass(frozen=True, repr=False)
class Binary(Term):
    left: Term
    right: Term

    symbol = "?"

    def children(self) -> Tuple[Term, ...]:
        return (self.left, self.right)

    def rebuild(self, left: Term, right: Term) -> "Binary":
        return type(self)(left, right)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


class Plus(Binary):
    symbol = "+"


class Seq(Binary):
    symbol = "."


class Par(Binary):
    symbol = "||"


class LeftMerge(Binary):
    symbol = "|_"


class CommMerge(Binary):
    symbol = "|"


@dataclass(frozen=True, repr=False)
class Nil(Term):
    """The empty process of the normalizer; the parser never produces it"""

    def leaf_text(self) -> str:
        return "0"

    def __repr__(self) -> str:
        return "Nil()"


@dataclass(frozen=True, repr=False)
class StepAtom(Term):
    """A resolved multi-event step constant; internal to normalization"""

    events: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(sorted(self.events)))

    def labels(self) -> Iterator[str]:
        yield from self.events

    def leaf_text(self) -> str:
        return "{" + ",".join(self.events) + "}"

    def __repr__(self) -> str:
        return f"StepAtom({self.events!r})"


PA2_ONLY = (LeftMerge, CommMerge)


def iter_subterms(term: Term) -> Iterator[Term]:
    yield term
    for child in term.children():
        yield from iter_subterms(child)


def system_of(term: Term) -> str:
    """The smallest system whose signature contains `term`"""
    if any(isinstance(node, PA2_ONLY) for node in iter_subterms(term)):
        return PA2
    return PA1


def check_system(term: Term, system: str) -> None:
    if system not in SYSTEMS:
        raise ConfigError(f"unknown system {system!r}; expected one of {', '.join(SYSTEMS)}")
    if system == PA1:
        for node in iter_subterms(term):
            if isinstance(node, PA2_ONLY):
                raise OperatorNotInSystemError(
                    f"operator {node.symbol!r} is not part of the PA1 signature")


# ---------------------------------------------------------------------------
# Semantic configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SemanticsConfig:
    """
    Event alphabet, communication function and event order

    `alphabet` is listed in increasing `order`. `gamma` holds (e1, e2, result)
    triples and is closed under symmetry.
    """

    alphabet: Tuple[str, ...]
    gamma: Tuple[Tuple[str, str, str], ...] = ()
    policy: str = OPTIONAL
    causality: str = SEQUENTIAL

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "gamma", tuple(sorted(set(map(tuple, self.gamma)))))
        self._validate()

    def _validate(self) -> None:
        if not self.alphabet:
            raise ConfigError("alphabet is empty")
        for label in self.alphabet:
            if not LABEL_PATTERN.fullmatch(label):
                raise ConfigError(f"invalid event label {label!r}")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ConfigError("alphabet lists a label twice")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}")
        if self.causality not in CAUSALITIES:
            raise ConfigError(f"unknown causality {self.causality!r}")
        members = set(self.alphabet)
        table: Dict[Tuple[str, str], str] = {}
        for e1, e2, result in self.gamma:
            if e1 not in members or e2 not in members:
                raise ConfigError(f"gamma {e1} {e2}: argument not in alphabet")
            if result not in members:
                raise ConfigError(f"gamma {e1} {e2} = {result}: result not in alphabet")
            if table.setdefault((e1, e2), result) != result:
                raise ConfigError(f"gamma {e1} {e2} is defined twice")
        for (e1, e2), result in table.items():
            if table.get((e2, e1)) != result:
                raise ConfigError(f"gamma is not symmetric on ({e1}, {e2})")

    @cached_property
    def _gamma_table(self) -> Dict[Tuple[str, str], str]:
        return {(e1, e2): result for e1, e2, result in self.gamma}

    @cached_property
    def _rank(self) -> Dict[str, int]:
        return {label: index for index, label in enumerate(self.alphabet)}

    def communicate(self, e1: str, e2: str) -> Optional[str]:
        return self._gamma_table.get((e1, e2))

    def leq(self, e1: str, e2: str) -> bool:
        return self._rank[e1] <= self._rank[e2]

    def less(self, e1: str, e2: str) -> bool:
        return self._rank[e1] < self._rank[e2]

    def with_overrides(self, policy: Optional[str] = None,
                       causality: Optional[str] = None) -> "SemanticsConfig":
        return replace(self,
                       policy=policy or self.policy,
                       causality=causality or self.causality)

    def describe(self) -> str:
        parts = [f"alphabet={','.join(self.alphabet)}"]
        parts += [f"gamma {e1} {e2} = {r}" for e1, e2, r in self.gamma if e1 <= e2]
        parts.append("order=" + "<".join(self.alphabet))
        parts.append(f"policy={self.policy}")
        if self.causality != SEQUENTIAL:
            parts.append(f"causality={self.causality}")
        return "; ".join(parts)


_GAMMA_ENTRY = re.compile(r"gamma\s+(\S+)\s+(\S+)\s*=\s*(\S+)")


def load_config(text: str) -> SemanticsConfig:
    """
    Parse the line-oriented config format

    Entries are separated by newlines or ';', '#' starts a comment. A single
    gamma line is mirrored automatically; a mirrored pair with a different
    result is an asymmetric-gamma error.
    """
    settings: Dict[str, str] = {}
    gamma: Dict[Tuple[str, str], str] = {}
    declared: Dict[Tuple[str, str], str] = {}

    for line in text.splitlines():
        for entry in line.split("#", 1)[0].split(";"):
            entry = entry.strip()
            if not entry:
                continue
            match = _GAMMA_ENTRY.fullmatch(entry)
            if match:
                e1, e2, result = match.groups()
                if (e1, e2) in declared:
                    raise ConfigError(f"duplicate key: gamma {e1} {e2}")
                mirrored = declared.get((e2, e1))
                if mirrored is not None and mirrored != result:
                    raise ConfigError(
                        f"asymmetric gamma: gamma {e2} {e1} = {mirrored} but gamma {e1} {e2} = {result}")
                declared[(e1, e2)] = result
                gamma[(e1, e2)] = gamma[(e2, e1)] = result
                continue
            if "=" not in entry:
                raise ConfigError(f"cannot read config entry {entry!r}")
            key, value = (part.strip() for part in entry.split("=", 1))
            if key not in ("alphabet", "order", "policy", "causality"):
                raise ConfigError(f"unknown config key {key!r}")
            if key in settings:
                raise ConfigError(f"duplicate key: {key}")
            settings[key] = value

    if "alphabet" not in settings:
        raise ConfigError("config has no alphabet")
    alphabet = [label.strip() for label in settings["alphabet"].split(",") if label.strip()]
    chain = [label.strip() for label in settings.get("order", "").split("<") if label.strip()]
    if sorted(chain) != sorted(alphabet) or len(set(chain)) != len(chain):
        raise ConfigError("order is not a total order over the alphabet")

    config = SemanticsConfig(
        alphabet=tuple(chain),
        gamma=tuple((e1, e2, result) for (e1, e2), result in gamma.items()),
        policy=settings.get("policy", OPTIONAL),
        causality=settings.get("causality", SEQUENTIAL),
    )
    logger.debug("Loaded config: %s", config.describe())
    return config


def load_config_file(path) -> SemanticsConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    return load_config(text)


def permissive_config(term_text: str) -> SemanticsConfig:
    """Config over the labels a term mentions, alphabetically ordered, no gamma"""
    labels = sorted(set(LABEL_PATTERN.findall(term_text)))
    return SemanticsConfig(alphabet=tuple(labels) or ("a",))


# ---------------------------------------------------------------------------
# Grammar
# ---------------------------------------------------------------------------

# One operator kind per parallel level; mixing them needs parentheses.
_GRAMMAR = r"""
    ?start: sum

    ?sum: parallel
        | sum "+" parallel                  -> choice

    ?parallel: sequence
        | par_chain
        | left_chain
        | comm_chain

    ?par_chain: sequence "||" sequence      -> par
        | par_chain "||" sequence           -> par

    ?left_chain: sequence "|_" sequence     -> left_merge
        | left_chain "|_" sequence          -> left_merge

    ?comm_chain: sequence "|" sequence      -> comm_merge
        | comm_chain "|" sequence           -> comm_merge

    ?sequence: primary
        | sequence "." primary              -> seq

    ?primary: NAME                          -> atom
        | "(" sum ")"

    NAME: /[A-Za-z][A-Za-z0-9_]*/

    %import common.WS
    %ignore WS
"""

_PARSER = Lark(_GRAMMAR, parser="lalr", propagate_positions=True)


class _TermBuilder(Transformer):
    def __init__(self, system: str, alphabet: Optional[frozenset]):
        super().__init__()
        self._system = system
        self._alphabet = alphabet

    def atom(self, children):
        token = children[0]
        if self._alphabet is not None and str(token) not in self._alphabet:
            raise UnknownLabelError(
                f"label {str(token)!r} at position {token.start_pos} is not in the alphabet")
        return Atom(str(token))

    def choice(self, children):
        return Plus(*children)

    def seq(self, children):
        return Seq(*children)

    def par(self, children):
        return Par(*children)

    @v_args(meta=True)
    def left_merge(self, meta, children):
        self._require_pa2("|_", meta)
        return LeftMerge(*children)

    @v_args(meta=True)
    def comm_merge(self, meta, children):
        self._require_pa2("|", meta)
        return CommMerge(*children)

    def _require_pa2(self, symbol: str, meta) -> None:
        if self._system == PA1:
            position = getattr(meta, "start_pos", None)
            raise OperatorNotInSystemError(
                f"operator {symbol!r} (term starting at position {position}) is not part of PA1")


def parse_term(text: str, system: str = PA2,
               config: Optional[SemanticsConfig] = None) -> Term:
    """
    Parse a closed term

    Args:
        text: term text, e.g. "(a || b) . d"
        system: PA1 rejects the left merge and communication merge
        config: when given, every label must belong to its alphabet

    Returns:
        The term's abstract syntax tree
    """
    if system not in SYSTEMS:
        raise ConfigError(f"unknown system {system!r}")
    if not text.strip():
        raise PASyntaxError("empty term", 0)
    try:
        tree = _PARSER.parse(text)
    except UnexpectedEOF:
        raise PASyntaxError("unexpected end of term", len(text)) from None
    except UnexpectedInput as e:
        position = getattr(e, "pos_in_stream", None)
        if position is None or position < 0:
            position = len(text)
        raise PASyntaxError(f"syntax error near {text[position:position + 8]!r}", position) from None

    alphabet = frozenset(config.alphabet) if config is not None else None
    try:
        return _TermBuilder(system, alphabet).transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, PAError):
            raise e.orig_exc from None
        raise


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def _level(term: Term) -> int:
    if isinstance(term, Plus):
        return 1
    if isinstance(term, (Par, LeftMerge, CommMerge)):
        return 2
    if isinstance(term, Seq):
        return 3
    return 4


def format_term(term: Term) -> str:
    """Print with minimal parentheses; parse_term(format_term(t)) == t"""
    if not isinstance(term, Binary):
        return term.leaf_text()

    level = _level(term)
    left = format_term(term.left)
    right = format_term(term.right)

    left_level = _level(term.left)
    if left_level < level or (level == 2 and left_level == 2 and type(term.left) is not type(term)):
        left = f"({left})"
    if _level(term.right) <= level:
        right = f"({right})"
    return f"{left} {term.symbol} {right}"
