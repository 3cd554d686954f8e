"""
Theorem-checking harnesses
Soundness sweeps over schema instances, completeness by semantic buckets against
normal forms, and the search for instances separating hp from hhp
"""

from __future__ import annotations

import itertools
import logging
import multiprocessing as mp
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from pa_axioms import (GAMMA_FOLD, LITERAL_FOLD, SKIP, AxiomSchema, axiom_schemas,
                       instantiate, normalize)
from pa_enumeration import EnumSpec, enum_terms
from pa_equivalence import EquivalenceKind, decide, equivalent, step_fingerprint
from pa_settings import DEFAULT_BUDGETS, Budgets
from pa_syntax import PA1, ConfigError, SemanticsConfig, Term, format_term

logger = logging.getLogger(__name__)

CHUNK_SIZE = 64


def default_alphabet(config: SemanticsConfig) -> Tuple[str, ...]:
    """Sweeps run over the two lowest labels unless told otherwise"""
    return config.alphabet[:2]


def _resolve_alphabet(config: SemanticsConfig, alphabet: Optional[Sequence[str]]) -> Tuple[str, ...]:
    if alphabet is None:
        return default_alphabet(config)
    unknown = [label for label in alphabet if label not in config.alphabet]
    if unknown:
        raise ConfigError(f"sweep alphabet uses labels outside the config: {', '.join(unknown)}")
    return tuple(alphabet)


def _map(worker, chunks: List, jobs: int) -> Iterator:
    """Results in submission order, on a process pool when jobs > 1"""
    if jobs <= 1 or len(chunks) <= 1:
        return map(worker, chunks)
    with mp.Pool(min(jobs, len(chunks))) as pool:
        return iter(pool.map(worker, chunks))


def _chunks(items: Sequence, size: int = CHUNK_SIZE) -> List[List]:
    return [list(items[i:i + size]) for i in range(0, len(items), size)]


# ---------------------------------------------------------------------------
# Schema instances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    schema: str
    substitution: Tuple[Tuple[str, Term], ...]
    events: Tuple[Tuple[str, str], ...]
    lhs: Term
    rhs: Term

    def describe(self) -> str:
        parts = [f"{name} := {format_term(term)}" for name, term in self.substitution]
        parts += [f"{name} := {label}" for name, label in self.events]
        return f"{self.schema} [{', '.join(parts)}]"


def schema_instances(schema: AxiomSchema, terms: Sequence[Term], config: SemanticsConfig,
                     counts: Dict[str, int]) -> Iterator[Instance]:
    """Every non-skipped instance; `counts` accumulates the skipped ones"""
    for values in itertools.product(terms, repeat=len(schema.variables)):
        subst = dict(zip(schema.variables, values))
        for labels in itertools.product(config.alphabet, repeat=len(schema.event_variables)):
            events = dict(zip(schema.event_variables, labels))
            pair = instantiate(schema, subst, events, config)
            if pair is SKIP:
                counts["skipped"] = counts.get("skipped", 0) + 1
                continue
            yield Instance(schema.name, tuple(subst.items()), tuple(events.items()), *pair)


@dataclass(frozen=True)
class InstanceFailure:
    instance: Instance
    relation: EquivalenceKind
    witness: Optional[Tuple[str, ...]]

    def to_dict(self) -> dict:
        return {
            "schema": self.instance.schema,
            "substitution": {name: format_term(term) for name, term in self.instance.substitution},
            "events": dict(self.instance.events),
            "relation": self.relation.value,
            "lhs": format_term(self.instance.lhs),
            "rhs": format_term(self.instance.rhs),
            "verdict": False,
            "witness": list(self.witness) if self.witness is not None else None,
        }


def _check_instances(task) -> List[Optional[InstanceFailure]]:
    kind, system, config, budgets, instances = task
    results = []
    for instance in instances:
        verdict = decide(kind, instance.lhs, instance.rhs, system, config, budgets)
        results.append(None if verdict.equivalent else
                       InstanceFailure(instance, kind, verdict.witness))
    return results


# ---------------------------------------------------------------------------
# Soundness
# ---------------------------------------------------------------------------

@dataclass
class SoundnessReport:
    system: str
    relation: EquivalenceKind
    size_bound: int
    config: SemanticsConfig
    alphabet: Tuple[str, ...]
    per_schema: Dict[str, Dict[str, int]] = field(default_factory=dict)
    failures: List[InstanceFailure] = field(default_factory=list)

    @property
    def checked(self) -> int:
        return sum(row["checked"] for row in self.per_schema.values())

    @property
    def skipped(self) -> int:
        return sum(row["skipped"] for row in self.per_schema.values())

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "report": "soundness",
            "system": self.system,
            "relation": self.relation.value,
            "size_bound": self.size_bound,
            "config": self.config.describe(),
            "alphabet": list(self.alphabet),
            "checked": self.checked,
            "skipped": self.skipped,
            "per_schema": self.per_schema,
            "failures": [failure.to_dict() for failure in self.failures],
            "ok": self.ok,
        }

    def summary_lines(self) -> List[str]:
        lines = [f"Soundness of {self.system} modulo {self.relation.symbol}, terms of size <= "
                 f"{self.size_bound} over {{{','.join(self.alphabet)}}} ({self.config.describe()})"]
        for name, row in self.per_schema.items():
            mark = "✅" if row["failures"] == 0 else "❌"
            lines.append(f"  {mark} {name:<6} checked {row['checked']:>6}  skipped {row['skipped']:>5}"
                         f"  failures {row['failures']}")
        for failure in self.failures[:10]:
            lines.append(f"  ❌ {failure.instance.describe()}: {format_term(failure.instance.lhs)}"
                         f" vs {format_term(failure.instance.rhs)}")
            if failure.witness:
                lines.append(f"       {' ; '.join(failure.witness)}")
        lines.append(f"{len(self.failures)} failures")
        return lines


def _select_schemas(system: str, include_derived: bool,
                    schema_names: Optional[Iterable[str]]) -> List[AxiomSchema]:
    schemas = axiom_schemas(system, include_derived=include_derived)
    if schema_names is None:
        return schemas
    wanted = list(schema_names)
    known = {schema.name for schema in schemas}
    unknown = [name for name in wanted if name not in known]
    if unknown:
        raise ConfigError(f"no schema named {', '.join(unknown)} in {system}")
    return [schema for schema in schemas if schema.name in wanted]


def check_soundness(system: str, kind: EquivalenceKind, size_bound: int, config: SemanticsConfig,
                    alphabet: Optional[Sequence[str]] = None, include_derived: bool = False,
                    schema_names: Optional[Iterable[str]] = None,
                    budgets: Budgets = DEFAULT_BUDGETS, jobs: Optional[int] = None) -> SoundnessReport:
    """
    Check every non-skipped schema instance LHS ~kind RHS

    Args:
        system: PA1 or PA2; the schema table and the semantics used
        kind: relation to check
        size_bound: largest node count substituted for x, y and z
        config: semantics; event metavariables range over its whole alphabet
        alphabet: labels of the substituted terms (default: two lowest labels)
        include_derived: also check the derived rules the normalizer relies on
        schema_names: restrict to these schemas
        budgets: state, pomset and rewrite caps
        jobs: worker processes (default budgets.jobs)

    Returns:
        SoundnessReport; failures are data, never exceptions
    """
    alphabet = _resolve_alphabet(config, alphabet)
    jobs = jobs or budgets.jobs
    terms = list(enum_terms(EnumSpec(system, alphabet, size_bound)))
    report = SoundnessReport(system, kind, size_bound, config, alphabet)

    for schema in _select_schemas(system, include_derived, schema_names):
        counts: Dict[str, int] = {}
        instances = list(schema_instances(schema, terms, config, counts))
        tasks = [(kind, system, config, budgets, chunk) for chunk in _chunks(instances)]
        failures = [result for chunk in _map(_check_instances, tasks, jobs)
                    for result in chunk if result is not None]
        report.per_schema[schema.name] = {
            "checked": len(instances),
            "skipped": counts.get("skipped", 0),
            "failures": len(failures),
        }
        report.failures.extend(failures)
        logger.info("%s: %d instances, %d failures", schema.name, len(instances), len(failures))
    return report


# ---------------------------------------------------------------------------
# Completeness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Profile:
    term: Term
    fingerprint: str
    literal_nf: str
    gamma_nf: str


def _profile_terms(task) -> List[_Profile]:
    system, config, budgets, terms = task
    profiles = []
    for term in terms:
        profiles.append(_Profile(
            term,
            step_fingerprint(term, system, config, budgets),
            normalize(term, system, config, budgets, fold=LITERAL_FOLD).nf.code,
            normalize(term, system, config, budgets, fold=GAMMA_FOLD).nf.code,
        ))
    return profiles


@dataclass(frozen=True)
class ClassViolation:
    """One semantic class whose members normalize to more than one normal form"""

    groups: Tuple[Tuple[str, Tuple[str, ...]], ...]
    gamma_caveat: bool

    def to_dict(self) -> dict:
        return {
            "normal_forms": [{"normal_form": nf, "terms": list(terms)} for nf, terms in self.groups],
            "gamma_caveat": self.gamma_caveat,
        }


@dataclass(frozen=True)
class NormalFormCollision:
    """Inequivalent terms that share a literal normal form"""

    normal_form: str
    terms: Tuple[str, ...]
    gamma_caveat: bool = False

    def to_dict(self) -> dict:
        return {"normal_form": self.normal_form, "terms": list(self.terms),
                "gamma_caveat": self.gamma_caveat}


@dataclass
class CompletenessReport:
    system: str
    relation: EquivalenceKind
    size_bound: int
    config: SemanticsConfig
    alphabet: Tuple[str, ...]
    terms: int = 0
    classes: int = 0
    violations: List[ClassViolation] = field(default_factory=list)
    collisions: List[NormalFormCollision] = field(default_factory=list)

    @property
    def caveats(self) -> List[ClassViolation]:
        return [v for v in self.violations if v.gamma_caveat]

    @property
    def collision_caveats(self) -> List[NormalFormCollision]:
        return [c for c in self.collisions if c.gamma_caveat]

    @property
    def unexpected(self) -> int:
        return (len(self.violations) - len(self.caveats)
                + len(self.collisions) - len(self.collision_caveats))

    @property
    def ok(self) -> bool:
        return self.unexpected == 0

    def to_dict(self) -> dict:
        return {
            "report": "completeness",
            "system": self.system,
            "relation": self.relation.value,
            "size_bound": self.size_bound,
            "config": self.config.describe(),
            "alphabet": list(self.alphabet),
            "terms": self.terms,
            "classes": self.classes,
            "violations": [v.to_dict() for v in self.violations],
            "collisions": [c.to_dict() for c in self.collisions],
            "unexpected": self.unexpected,
            "ok": self.ok,
        }

    def summary_lines(self) -> List[str]:
        lines = [f"Completeness of {self.system} modulo {self.relation.symbol}, terms of size <= "
                 f"{self.size_bound} over {{{','.join(self.alphabet)}}} ({self.config.describe()})",
                 f"  {self.terms} terms in {self.classes} classes"]
        for violation in self.violations:
            mark = "⚠️ " if violation.gamma_caveat else "❌"
            note = " (communication caveat)" if violation.gamma_caveat else ""
            shown = [f"{terms[0]} -> {nf}" for nf, terms in violation.groups]
            lines.append(f"  {mark} class splits into {len(violation.groups)} normal forms{note}: "
                         + " | ".join(shown))
        for collision in self.collisions:
            mark = "⚠️ " if collision.gamma_caveat else "❌"
            note = " (communication caveat)" if collision.gamma_caveat else ""
            lines.append(f"  {mark} inequivalent terms share {collision.normal_form}{note}: "
                         + ", ".join(collision.terms[:4]))
        lines.append(f"{len(self.violations)} violations ({len(self.caveats)} communication caveats), "
                     f"{len(self.collisions)} collisions ({len(self.collision_caveats)} communication caveats)")
        return lines


def _refine(bucket: List[_Profile], kind: EquivalenceKind, system: str,
            config: SemanticsConfig, budgets: Budgets) -> List[List[_Profile]]:
    if kind is EquivalenceKind.STEP:
        return [bucket]
    classes: List[List[_Profile]] = []
    for profile in bucket:
        for members in classes:
            if equivalent(kind, members[0].term, profile.term, system, config, budgets):
                members.append(profile)
                break
        else:
            classes.append([profile])
    return classes


def _collision(nf: str, members: List[Tuple[int, _Profile]]) -> Optional[NormalFormCollision]:
    if len({index for index, _ in members}) < 2:
        return None
    classes_by_gamma: Dict[str, set] = {}
    for index, profile in members:
        classes_by_gamma.setdefault(profile.gamma_nf, set()).add(index)
    caveat = all(len(indices) == 1 for indices in classes_by_gamma.values())
    return NormalFormCollision(nf, tuple(format_term(p.term) for _, p in members), caveat)


def check_completeness(system: str, kind: EquivalenceKind, size_bound: int,
                       config: SemanticsConfig, alphabet: Optional[Sequence[str]] = None,
                       budgets: Budgets = DEFAULT_BUDGETS,
                       jobs: Optional[int] = None) -> CompletenessReport:
    """
    Bucket enumerated terms by semantic class and compare their normal forms

    Classes come from the step fingerprint, refined by the game for `kind`.
    A class with several literal normal forms is a violation; it is the
    communication caveat when the communication-aware normal forms agree.
    Two classes sharing a literal normal form is a collision; it is the
    communication caveat when the communication-aware normal forms keep
    the classes apart.
    """
    alphabet = _resolve_alphabet(config, alphabet)
    jobs = jobs or budgets.jobs
    terms = list(enum_terms(EnumSpec(system, alphabet, size_bound)))
    tasks = [(system, config, budgets, chunk) for chunk in _chunks(terms)]
    profiles = [p for chunk in _map(_profile_terms, tasks, jobs) for p in chunk]

    buckets: Dict[str, List[_Profile]] = {}
    for profile in profiles:
        buckets.setdefault(profile.fingerprint, []).append(profile)

    report = CompletenessReport(system, kind, size_bound, config, alphabet, terms=len(terms))
    members_by_nf: Dict[str, List[Tuple[int, _Profile]]] = {}
    class_index = 0
    for fingerprint in sorted(buckets):
        for members in _refine(buckets[fingerprint], kind, system, config, budgets):
            class_index += 1
            groups: Dict[str, List[str]] = {}
            for profile in members:
                groups.setdefault(profile.literal_nf, []).append(format_term(profile.term))
            if len(groups) > 1:
                caveat = len({profile.gamma_nf for profile in members}) == 1
                report.violations.append(ClassViolation(
                    tuple((nf, tuple(groups[nf])) for nf in sorted(groups)), caveat))
            for profile in members:
                members_by_nf.setdefault(profile.literal_nf, []).append((class_index, profile))

    report.classes = class_index
    for nf in sorted(members_by_nf):
        collision = _collision(nf, members_by_nf[nf])
        if collision is not None:
            report.collisions.append(collision)
    logger.info("completeness: %d terms, %d classes, %d violations, %d collisions",
                report.terms, report.classes, len(report.violations), len(report.collisions))
    return report


# ---------------------------------------------------------------------------
# hp versus hhp
# ---------------------------------------------------------------------------

WITNESS_SCHEMAS = ("P1", "P2", "P3", "P4", "P5", "P6", "P7")
SANITY_SCHEMAS = ("A1", "A2", "A3", "A4", "A5")


@dataclass(frozen=True)
class HhpWitness:
    instance: Instance
    backtracking: Tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "schema": self.instance.schema,
            "substitution": {name: format_term(term) for name, term in self.instance.substitution},
            "events": dict(self.instance.events),
            "lhs": format_term(self.instance.lhs),
            "rhs": format_term(self.instance.rhs),
            "witness": list(self.backtracking),
        }


def _separate_hp_hhp(task) -> List[Optional[HhpWitness]]:
    config, budgets, instances = task
    results = []
    for instance in instances:
        found = None
        if equivalent(EquivalenceKind.HP, instance.lhs, instance.rhs, PA1, config, budgets):
            verdict = decide(EquivalenceKind.HHP, instance.lhs, instance.rhs, PA1, config, budgets)
            if not verdict.equivalent:
                found = HhpWitness(instance, verdict.witness or ())
        results.append(found)
    return results


@dataclass
class HhpWitnessReport:
    size_bound: int
    config: SemanticsConfig
    alphabet: Tuple[str, ...]
    searched: int = 0
    witness: Optional[HhpWitness] = None
    sanity_checked: int = 0
    sanity_failures: List[InstanceFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.sanity_failures

    def to_dict(self) -> dict:
        return {
            "report": "hhp-witness",
            "system": PA1,
            "relation": EquivalenceKind.HHP.value,
            "size_bound": self.size_bound,
            "config": self.config.describe(),
            "alphabet": list(self.alphabet),
            "searched": self.searched,
            "witness": self.witness.to_dict() if self.witness is not None else None,
            "sanity_checked": self.sanity_checked,
            "sanity_failures": [failure.to_dict() for failure in self.sanity_failures],
            "ok": self.ok,
        }

    def summary_lines(self) -> List[str]:
        lines = [f"hp/hhp separation over PA1 P1-P7, terms of size <= {self.size_bound} over "
                 f"{{{','.join(self.alphabet)}}} ({self.config.describe()})",
                 f"  searched {self.searched} instances"]
        if self.witness is None:
            lines.append("  none found within bound")
        else:
            instance = self.witness.instance
            lines.append(f"  🎯 {instance.describe()}: {format_term(instance.lhs)} ~hp "
                         f"{format_term(instance.rhs)} but not ~hhp")
            lines.extend(f"       {step}" for step in self.witness.backtracking)
        mark = "✅" if self.ok else "❌"
        lines.append(f"  {mark} A1-A5 sanity: {self.sanity_checked} instances, "
                     f"{len(self.sanity_failures)} hhp failures")
        return lines


def find_hhp_witness(size_bound: int, config: SemanticsConfig,
                     alphabet: Optional[Sequence[str]] = None,
                     budgets: Budgets = DEFAULT_BUDGETS,
                     jobs: Optional[int] = None) -> HhpWitnessReport:
    """
    First P1-P7 instance (enumeration order) whose sides are hp- but not
    hhp-bisimilar, plus the A1-A5 instances checked modulo hhp as a sanity row
    """
    alphabet = _resolve_alphabet(config, alphabet)
    jobs = jobs or budgets.jobs
    terms = list(enum_terms(EnumSpec(PA1, alphabet, size_bound)))
    report = HhpWitnessReport(size_bound, config, alphabet)
    counts: Dict[str, int] = {}

    for schema in _select_schemas(PA1, False, WITNESS_SCHEMAS):
        instances = list(schema_instances(schema, terms, config, counts))
        tasks = [(config, budgets, chunk) for chunk in _chunks(instances)]
        for chunk, results in zip(tasks, _map(_separate_hp_hhp, tasks, jobs)):
            for instance, found in zip(chunk[2], results):
                report.searched += 1
                if found is not None:
                    report.witness = found
                    break
            if report.witness is not None:
                break
        if report.witness is not None:
            logger.info("hp/hhp witness found in %s", schema.name)
            break

    for schema in _select_schemas(PA1, False, SANITY_SCHEMAS):
        instances = list(schema_instances(schema, terms, config, counts))
        tasks = [(EquivalenceKind.HHP, PA1, config, budgets, chunk) for chunk in _chunks(instances)]
        report.sanity_checked += len(instances)
        report.sanity_failures.extend(result for chunk in _map(_check_instances, tasks, jobs)
                                      for result in chunk if result is not None)
    return report
