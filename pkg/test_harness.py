"""
Tests for the soundness, completeness and hp/hhp harnesses
Bounds are kept small; the full sweeps run from the command line
"""

import json

import jsonschema
import pytest

from pa_axioms import axiom_schemas
from pa_equivalence import EquivalenceKind, equivalent
from pa_harness import (check_completeness, check_soundness, default_alphabet,
                        find_hhp_witness, schema_instances)
from pa_syntax import PA1, PA2, Atom, ConfigError, parse_term

STEP = EquivalenceKind.STEP
HP = EquivalenceKind.HP


def failing_schemas(report):
    return {failure.instance.schema for failure in report.failures}


def test_default_alphabet(cfg0):
    assert default_alphabet(cfg0) == ("a", "b")


def test_instances_skip_side_conditions(cfg0):
    l2 = next(s for s in axiom_schemas(PA2) if s.name == "L2")
    counts = {}
    instances = list(schema_instances(l2, [Atom("a")], cfg0, counts))
    # e1 <= e2 holds for 10 of the 16 label pairs over a<b<c<d
    assert len(instances) == 10
    assert counts["skipped"] == 6
    assert instances[0].describe() == "L2 [y := a, e1 := a, e2 := a]"


def test_pa1_step_soundness(two_letters):
    report = check_soundness(PA1, STEP, 3, two_letters)
    assert report.ok
    assert report.checked > 0
    assert set(report.per_schema) == {s.name for s in axiom_schemas(PA1)}


def test_pa1_hp_soundness_under_sequential_causality(two_letters):
    report = check_soundness(PA1, HP, 1, two_letters)
    assert not report.ok
    assert failing_schemas(report) == {"P3", "P4", "P5"}
    assert all(failure.witness for failure in report.failures)


def test_pa1_hp_soundness_under_synchronous_causality(two_letters):
    config = two_letters.with_overrides(causality="synchronous")
    assert check_soundness(PA1, HP, 1, config).ok


def test_pa2_step_soundness(cfg0):
    report = check_soundness(PA2, STEP, 1, cfg0, include_derived=True)
    assert report.ok
    assert "C0a" in report.per_schema


def test_forced_policy_breaks_parallel_expansion(cfg0_forced):
    report = check_soundness(PA2, STEP, 1, cfg0_forced)
    assert failing_schemas(report) == {"P1"}
    shown = {(f.to_dict()["lhs"], f.to_dict()["rhs"]) for f in report.failures}
    assert ("a || b", "a |_ b + b |_ a + a | b") in shown


def test_schema_selection(cfg0):
    report = check_soundness(PA2, STEP, 1, cfg0, schema_names=["C6", "C9"])
    assert list(report.per_schema) == ["C6", "C9"]
    with pytest.raises(ConfigError):
        check_soundness(PA2, STEP, 1, cfg0, schema_names=["P9"])


def test_alphabet_must_come_from_config(two_letters):
    with pytest.raises(ConfigError):
        check_soundness(PA1, STEP, 1, two_letters, alphabet=["z"])


def test_soundness_report_document(cfg0, schema_dir):
    report = check_soundness(PA2, STEP, 1, cfg0.with_overrides(policy="forced"))
    document = report.to_dict()
    jsonschema.validate(document, json.loads((schema_dir / "report.schema.json").read_text()))
    assert document["ok"] is False
    assert document["failures"][0]["verdict"] is False


def test_worker_pool_gives_the_same_report(cfg0_forced):
    serial = check_soundness(PA2, STEP, 1, cfg0_forced)
    parallel = check_soundness(PA2, STEP, 1, cfg0_forced, jobs=2)
    assert parallel.to_dict() == serial.to_dict()


def test_pa1_step_completeness(cfg_empty):
    report = check_completeness(PA1, STEP, 3, cfg_empty)
    assert report.ok
    assert report.terms == 14
    assert not report.violations and not report.collisions


def test_pomset_completeness_refines_classes(cfg_empty):
    step = check_completeness(PA1, STEP, 3, cfg_empty)
    pomset = check_completeness(PA1, EquivalenceKind.POMSET, 3, cfg_empty)
    assert pomset.classes >= step.classes


def test_communication_caveat(cfg0):
    report = check_completeness(PA1, STEP, 5, cfg0, alphabet=("a", "b", "c"))
    caveats = [v for v in report.caveats
               if any("a || b" in terms for _, terms in v.groups)
               and any("c + a || b" in terms for _, terms in v.groups)]
    assert caveats
    assert {nf for nf, _ in caveats[0].groups} == {"{a,b}", "c + {a,b}"}


def test_hhp_witness_search(two_letters):
    report = find_hhp_witness(1, two_letters)
    assert report.ok
    assert report.searched > 0
    assert report.sanity_checked > 0
    assert report.to_dict()["report"] == "hhp-witness"


def test_hhp_agrees_with_hp_on_commuted_parallel(two_letters):
    left = parse_term("a || b")
    right = parse_term("b || a")
    assert equivalent(HP, left, right, PA1, two_letters)
    assert equivalent(EquivalenceKind.HHP, left, right, PA1, two_letters)


def test_forced_step_completeness_marks_literal_collisions(cfg0_forced):
    report = check_completeness(PA2, STEP, 5, cfg0_forced)
    assert report.collisions
    assert report.collision_caveats == report.collisions
    assert any("a |_ (a || b)" in collision.terms for collision in report.collisions)
    assert report.unexpected == 0
    assert report.ok


def test_collision_document_flags_caveats(cfg0_forced, schema_dir):
    document = check_completeness(PA2, STEP, 5, cfg0_forced).to_dict()
    schema = json.loads((schema_dir / "report.schema.json").read_text())
    jsonschema.validate(document, schema)
    assert all(collision["gamma_caveat"] for collision in document["collisions"])
