import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ontocheck.conformance import (
    Mode,
    ValidationOptions,
    check_generalization_sets,
    check_multiplicities,
    check_typing,
    validate,
)
from ontocheck.model import UnknownOntology, UnknownRelationship
from ontocheck.syntax import parse_instance_model

from randmodels import random_model

PARTIAL = ValidationOptions(Mode.PARTIAL)


def model(body):
    return parse_instance_model("model m conforms SituationCO\n" + body)


def keyed(violations):
    return {(v.code, v.subjects) for v in violations}


def test_typing_mismatch(ws):
    m = model('ps1 : "Particular Situation"\nte1 : "Target Entity"\n'
              'link "deals with target" te1 -> ps1\n')
    assert keyed(check_typing(m, ws)) == {
        ("TYPE_MISMATCH", ("ps1", "deals with target")),
        ("TYPE_MISMATCH", ("te1", "deals with target")),
    }


def test_typing_accepts_subtypes(ws):
    m = model('ps1 : "Particular Situation"\nce1 : "Natural Environment"\n'
              'link "deals with environment" ps1 -> ce1\n')
    assert check_typing(m, ws) == []


def test_missing_target_is_a_min_violation(ws):
    m = model('ps1 : "Particular Situation"\n')
    assert ("MULT_MIN", ("ps1", "deals with target")) in keyed(check_multiplicities(m, ws))
    assert check_multiplicities(m, ws, PARTIAL) == []


def test_situation_implied_by_two_goals_exceeds_max(ws):
    m = model('g1 : "Specific Goal"\ng2 : "Generic Goal"\nps1 : "Particular Situation"\n'
              'link "implies" g1 -> ps1\nlink "implies" g2 -> ps1\n')
    found = keyed(check_multiplicities(m, ws, PARTIAL))
    assert found == {("MULT_MAX", ("ps1", "implies"))}


def test_ill_typed_links_do_not_count(ws):
    m = model('te1 : "Target Entity"\nps1 : "Particular Situation"\n'
              'link "implies" te1 -> ps1\nlink "implies" ps1 -> ps1\n')
    assert check_multiplicities(m, ws, PARTIAL) == []


def test_genset_disjoint_and_incomplete(ws):
    m = model('s1 : "Particular Situation", "Generic Situation"\ns2 : "Situation"\n'
              'c1 : "Space Entity", "Time Entity"\nc2 : "Context Entity"\n')
    found = keyed(check_generalization_sets(m, ws))
    assert found == {
        ("GENSET_DISJOINT", ("s1", "Situation")),
        ("GENSET_INCOMPLETE", ("s2", "Situation")),
        ("GENSET_INCOMPLETE", ("c2", "Context Entity")),
    }
    assert keyed(check_generalization_sets(m, ws, PARTIAL)) == {
        ("GENSET_DISJOINT", ("s1", "Situation"))}


def test_valid_fixture_passes(ws, fixture_model):
    report = validate(fixture_model("valid"), ws)
    assert report.passed and report.status == "pass"


def test_scenario_complete_and_partial(ws, fixture_model):
    m = fixture_model("scenario")
    report = validate(m, ws)
    assert [(v.code, v.subjects) for v in report.diagnostics] == [
        ("MULT_MIN", ("org1", "works at"))]
    assert validate(m, ws, PARTIAL).passed


def test_unknown_relationship_and_ontology(ws):
    with pytest.raises(UnknownRelationship):
        validate(model('a : "Goal"\nlink "owns" a -> a\n'), ws)
    with pytest.raises(UnknownOntology):
        validate(parse_instance_model('model m conforms Nowhere\na : "Goal"\n'), ws)


def test_report_is_canonically_ordered(ws, fixture_model):
    m = fixture_model("scenario")
    shuffled = type(m)(m.name, m.conforms_to, tuple(reversed(m.nodes)), tuple(reversed(m.links)))
    assert validate(m, ws) == validate(shuffled, ws)
    d = validate(model('ps1 : "Particular Situation"\n'), ws).diagnostics
    assert list(d) == sorted(d, key=lambda v: v.sort_key())


@settings(max_examples=150)
@given(st.integers(0, 2**32))
def test_partial_is_subset_of_complete(ws, sco, seed):
    m = random_model(random.Random(seed), sco)
    complete = set(validate(m, ws).diagnostics)
    partial = set(validate(m, ws, PARTIAL).diagnostics)
    assert partial <= complete
    assert {v.code for v in complete - partial} <= {"MULT_MIN", "GENSET_INCOMPLETE"}


@settings(max_examples=150)
@given(st.integers(0, 2**32), st.integers(0, 2**32))
def test_deleting_links_never_adds_max_violations(ws, sco, seed, drop_seed):
    m = random_model(random.Random(seed), sco)
    rng = random.Random(drop_seed)
    smaller = m.without_links(l for l in m.links if rng.random() < 0.5)

    def maxes(x):
        return {v for v in check_multiplicities(x, ws) if v.code == "MULT_MAX"}

    before = {v.subjects for v in maxes(m)}
    assert {v.subjects for v in maxes(smaller)} <= before
