"""
Command-line workbench for PA1 and PA2
Runs single queries (parse, lts, pomsets, equiv, normalize) and the batch sweeps
(soundness, completeness, hhp-witness, enumerate), optionally saving a JSON report
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pa_axioms import FOLD_MODES, GAMMA_FOLD, normalize
from pa_enumeration import DEDUP_MODES, NO_DEDUP, EnumSpec, count_terms, enum_terms
from pa_equivalence import EquivalenceKind, decide
from pa_harness import check_completeness, check_soundness, find_hhp_witness
from pa_pomsets import canonical_pomset, pomset_transitions
from pa_semantics import build_lts, describe_state, init_state, lts_to_dot, lts_to_json
from pa_settings import Budgets
from pa_syntax import (CAUSALITIES, PA1, PA2, POLICIES, ConfigError, PAError,
                       SemanticsConfig, format_term, load_config_file, parse_term,
                       permissive_config, system_of)

logger = logging.getLogger("pa_workbench")

CONFIG_DIR = Path(__file__).resolve().parent / "configs"

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2


def resolve_config(name: Optional[str], term_texts: List[str] = ()) -> SemanticsConfig:
    """
    A config path, a shipped config name (cfg0, cfg_empty), or, for term
    commands without --config, a permissive config over the mentioned labels
    """
    if name is None:
        if not term_texts:
            raise ConfigError("this command needs --config")
        return permissive_config(" ".join(term_texts))
    path = Path(name)
    if not path.exists():
        shipped = CONFIG_DIR / f"{name}.conf"
        if shipped.exists():
            path = shipped
    return load_config_file(path)


def _system_flag(value: str) -> str:
    value = value.strip().upper()
    if value == "AUTO":
        return "auto"
    if value not in (PA1, PA2):
        raise argparse.ArgumentTypeError(f"unknown system {value!r}; use pa1, pa2 or auto")
    return value


def _alphabet_flag(value: str) -> List[str]:
    return [label.strip() for label in value.split(",") if label.strip()]


def _semantics(args, term_texts: List[str] = ()) -> SemanticsConfig:
    config = resolve_config(args.config, term_texts)
    return config.with_overrides(policy=args.policy, causality=args.causality)


def _parse(args, text: str, config: Optional[SemanticsConfig]):
    """Parse against PA2 when --system is auto, then narrow to the smallest system"""
    system = PA2 if args.system == "auto" else args.system
    term = parse_term(text, system, config)
    return term, (system_of(term) if args.system == "auto" else system)


def _sweep_system(args) -> str:
    if args.system_required == "auto":
        raise ConfigError("sweeps need an explicit --system pa1 or pa2")
    return args.system_required


def _emit(args, document: dict, lines: List[str]) -> None:
    if args.json:
        print(json.dumps(document, indent=2, ensure_ascii=False))
    else:
        for line in lines:
            print(line)
    if args.report:
        report_path = Path(args.report)
        report_path.parent.mkdir(parents=True, exist_ok=True)
        with open(report_path, "w", encoding="utf-8") as f:
            json.dump(document, f, indent=2, ensure_ascii=False)
        print(f"📊 Report saved to: {report_path}", file=sys.stderr)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_parse(args, budgets: Budgets) -> int:
    config = resolve_config(args.config) if args.config else None
    term, system = _parse(args, args.term, config)
    document = {"term": format_term(term), "system": system, "size": term.size(), "ast": repr(term)}
    _emit(args, document, [format_term(term), f"  system {system}, size {term.size()}", f"  {term!r}"])
    return EXIT_OK


def cmd_lts(args, budgets: Budgets) -> int:
    config = _semantics(args, [args.term])
    term, system = _parse(args, args.term, config)
    lts = build_lts(term, system, config, budgets)
    if args.dot:
        print(lts_to_dot(lts))
        return EXIT_OK
    document = lts_to_json(lts)
    lines = [f"LTS of {format_term(term)}: {lts.state_count} states, {len(lts.edges())} transitions"]
    lines += [f"  {i}: {state}" for i, state in enumerate(document["states"])]
    lines += [f"  {edge['from']} --{'+'.join(edge['label'])}--> {edge['to']}" for edge in document["edges"]]
    if lts.stuck:
        lines.append(f"  stuck: {', '.join(map(str, lts.stuck))}")
    _emit(args, document, lines)
    return EXIT_OK


def cmd_pomsets(args, budgets: Budgets) -> int:
    config = _semantics(args, [args.term])
    term, system = _parse(args, args.term, config)
    entries = []
    for pomset, target in pomset_transitions(init_state(term), system, config):
        entries.append({
            "pomset": pomset.describe(),
            "code": canonical_pomset(pomset, budgets.pomset),
            "target": describe_state(target),
        })
    entries.sort(key=lambda entry: (entry["code"], entry["target"]))
    unique = [entry for i, entry in enumerate(entries) if i == 0 or entry != entries[i - 1]]
    lines = [f"Pomset transitions of {format_term(term)}: {len(unique)}"]
    lines += [f"  {entry['pomset']} -> {entry['target']}" for entry in unique]
    _emit(args, {"term": format_term(term), "transitions": unique}, lines)
    return EXIT_OK


def cmd_equiv(args, budgets: Budgets) -> int:
    config = _semantics(args, [args.left, args.right])
    left, left_system = _parse(args, args.left, config)
    right, right_system = _parse(args, args.right, config)
    system = PA2 if PA2 in (left_system, right_system) else PA1
    kind = EquivalenceKind.parse(args.rel)
    verdict = decide(kind, left, right, system, config, budgets)
    if verdict.equivalent:
        lines = [f"✅ {format_term(left)} {kind.symbol} {format_term(right)}"]
    else:
        lines = [f"❌ {format_term(left)} and {format_term(right)} are not {kind.symbol}-equivalent"]
        lines += [f"  {move}" for move in verdict.witness or ()]
    _emit(args, verdict.to_dict(), lines)
    return EXIT_OK if verdict.equivalent else EXIT_NEGATIVE


def cmd_normalize(args, budgets: Budgets) -> int:
    config = _semantics(args, [args.term])
    term, system = _parse(args, args.term, config)
    report = normalize(term, system, config, budgets, fold=args.fold)
    lines = [f"{format_term(term)}  =>  {report.nf.code}"]
    if args.trace:
        lines += [f"  {step.describe()}" for step in report.rule_trace]
    _emit(args, report.to_dict(), lines)
    return EXIT_OK


def cmd_soundness(args, budgets: Budgets) -> int:
    config = _semantics(args)
    report = check_soundness(_sweep_system(args), EquivalenceKind.parse(args.rel), args.size, config,
                             alphabet=args.alphabet, include_derived=args.derived,
                             schema_names=args.schemas, budgets=budgets)
    _emit(args, report.to_dict(), report.summary_lines())
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_completeness(args, budgets: Budgets) -> int:
    config = _semantics(args)
    report = check_completeness(_sweep_system(args), EquivalenceKind.parse(args.rel), args.size, config,
                                alphabet=args.alphabet, budgets=budgets)
    _emit(args, report.to_dict(), report.summary_lines())
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_hhp_witness(args, budgets: Budgets) -> int:
    config = _semantics(args)
    report = find_hhp_witness(args.size, config, alphabet=args.alphabet, budgets=budgets)
    _emit(args, report.to_dict(), report.summary_lines())
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_enumerate(args, budgets: Budgets) -> int:
    spec = EnumSpec(_sweep_system(args), tuple(args.alphabet or ("a",)), args.size, args.dedup)
    terms = [format_term(term) for term in enum_terms(spec)]
    if args.json:
        _emit(args, {"system": spec.system, "alphabet": list(spec.alphabet), "max_size": spec.max_size,
                     "dedup": spec.dedup, "count": count_terms(spec), "terms": terms}, [])
    else:
        for text in terms:
            print(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file, or a shipped name: cfg0, cfg_empty")
    common.add_argument("--policy", choices=POLICIES, help="override the config's communication policy")
    common.add_argument("--causality", choices=CAUSALITIES, help="override the config's causality mode")
    common.add_argument("--json", action="store_true", help="print one JSON document")
    common.add_argument("--report", help="also save the JSON document to this path")
    common.add_argument("--state-budget", type=int, help="maximum LTS states / triples")
    common.add_argument("--pomset-budget", type=int, help="maximum occurrences per canonicalized pomset")
    common.add_argument("--rewrite-budget", type=int, help="maximum rule applications per normalization")
    common.add_argument("--jobs", type=int, help="worker processes for the sweeps")
    common.add_argument("--verbose", "-v", action="count", default=0, help="-v for progress, -vv for debug")

    term_system = argparse.ArgumentParser(add_help=False)
    term_system.add_argument("--system", type=_system_flag, default="auto",
                             help="pa1, pa2 or auto (smallest system containing the term)")

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--system", dest="system_required", type=_system_flag, required=True)
    sweep.add_argument("--size", type=int, required=True, help="largest term size (node count)")
    sweep.add_argument("--alphabet", type=_alphabet_flag, help="labels of the enumerated terms, e.g. a,b")

    parser = argparse.ArgumentParser(prog="pa", description="PA1/PA2 process algebra workbench")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("parse", parents=[common, term_system], help="parse and pretty-print a term")
    p.add_argument("term")
    p.set_defaults(handler=cmd_parse)

    p = commands.add_parser("lts", parents=[common, term_system], help="step transition system of a term")
    p.add_argument("term")
    p.add_argument("--dot", action="store_true", help="print Graphviz DOT")
    p.set_defaults(handler=cmd_lts)

    p = commands.add_parser("pomsets", parents=[common, term_system], help="pomset transitions of a term")
    p.add_argument("term")
    p.set_defaults(handler=cmd_pomsets)

    p = commands.add_parser("equiv", parents=[common, term_system], help="decide an equivalence")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--rel", default="s", help="s, p, hp or hhp")
    p.set_defaults(handler=cmd_equiv)

    p = commands.add_parser("normalize", parents=[common, term_system], help="axiom normal form")
    p.add_argument("term")
    p.add_argument("--trace", action="store_true", help="list every rule application")
    p.add_argument("--fold", choices=FOLD_MODES, default=GAMMA_FOLD)
    p.set_defaults(handler=cmd_normalize)

    p = commands.add_parser("soundness", parents=[common, sweep], help="check axiom instances")
    p.add_argument("--rel", default="s")
    p.add_argument("--derived", action="store_true", help="include the derived rules (PA2)")
    p.add_argument("--schemas", type=_alphabet_flag, help="comma-separated schema names")
    p.set_defaults(handler=cmd_soundness)

    p = commands.add_parser("completeness", parents=[common, sweep], help="compare classes and normal forms")
    p.add_argument("--rel", default="s")
    p.set_defaults(handler=cmd_completeness)

    p = commands.add_parser("hhp-witness", parents=[common], help="search P1-P7 for hp but not hhp")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--alphabet", type=_alphabet_flag)
    p.set_defaults(handler=cmd_hhp_witness)

    p = commands.add_parser("enumerate", parents=[common, sweep], help="list closed terms")
    p.add_argument("--dedup", choices=DEDUP_MODES, default=NO_DEDUP)
    p.set_defaults(handler=cmd_enumerate)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function for command line usage"""
    parser = build_parser()
    args = parser.parse_args(argv)

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    try:
        budgets = Budgets.from_env().override(
            states=args.state_budget, pomset=args.pomset_budget,
            rewrites=args.rewrite_budget, jobs=args.jobs)
        return args.handler(args, budgets)
    except PAError as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
