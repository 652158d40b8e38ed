import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ontocheck.instances import (
    Direction,
    InstanceLink,
    InstanceModel,
    InstanceNode,
    Interpretation,
    UnknownNode,
    instances_of,
    partners,
)
from ontocheck.model import TermNotFound, TermRef
from ontocheck.syntax import parse_instance_model

from randmodels import random_model

S = "SituationCO"


def test_instances_of_follows_taxonomy(ws):
    m = parse_instance_model(
        'model m conforms SituationCO\n'
        'a : "Artificial Environment"\nb : "Space Entity"\nc : "Target Entity"\n')
    assert instances_of(m, TermRef(S, "Context Entity"), ws) == {"a", "b"}
    assert instances_of(m, TermRef(S, "Environment Entity"), ws) == {"a"}
    assert instances_of(m, TermRef(S, "Natural Environment"), ws) == frozenset()


def test_instances_of_accepts_synonyms(ws):
    m = parse_instance_model('model m conforms SituationCO\ng : "Objective"\n')
    assert instances_of(m, TermRef(S, "Goal"), ws) == {"g"}
    assert instances_of(m, TermRef(S, "Organizational Goal"), ws) == {"g"}


def test_unknown_asserted_term(ws):
    m = parse_instance_model('model m conforms SituationCO\ng : "Quality Focus"\n')
    with pytest.raises(TermNotFound):
        Interpretation(m, ws)


def test_partners(fixture_model):
    m = fixture_model("valid")
    assert partners(m, "deals with environment", "ps1") == {"ce1", "ce2"}
    assert partners(m, "is surrounded by", "ce1", Direction.INCOMING) == {"te1"}
    assert partners(m, "is surrounded by", "ce1", "outgoing") == frozenset()
    with pytest.raises(UnknownNode):
        partners(m, "implies", "nobody")


def test_model_rejects_bad_structure():
    with pytest.raises(ValueError):
        InstanceModel("m", S, (InstanceNode("a", ("X",)), InstanceNode("a", ("Y",))))
    with pytest.raises(ValueError):
        InstanceModel("m", S, (InstanceNode("a", ("X",)),), (InstanceLink("r", "a", "b"),))
    with pytest.raises(ValueError):
        InstanceNode("a", ())


def test_links_are_deduplicated():
    n = (InstanceNode("a", ("X",)),)
    link = InstanceLink("r", "a", "a")
    assert InstanceModel("m", S, n, (link, link)).links == (link,)


@given(st.integers(0, 2**32))
def test_partners_are_symmetric(sco, seed):
    m = random_model(random.Random(seed), sco)
    for link in m.links:
        assert link.target in partners(m, link.relationship, link.source, Direction.OUTGOING)
        assert link.source in partners(m, link.relationship, link.target, Direction.INCOMING)
    for node in m.nodes:
        for rel in {l.relationship for l in m.links}:
            for t in partners(m, rel, node.id):
                assert node.id in partners(m, rel, t, Direction.INCOMING)


@given(st.integers(0, 2**32), st.sampled_from(
    ["Context Entity", "Situation", "Goal", "Target Entity", "Environment Entity"]))
def test_instances_of_is_monotone_in_subsumption(ws, sco, seed, term):
    m = random_model(random.Random(seed), sco)
    interp = Interpretation(m, ws)
    parent = interp.instances_of(TermRef(S, term))
    for child in sco.descendants(term):
        assert interp.instances_of(TermRef(S, child)) <= parent
