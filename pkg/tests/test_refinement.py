
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ontocheck.model import Multiplicity, UnknownRelationship
from ontocheck.refinement import (
    Mode,
    RefinementMap,
    RefinementRow,
    endpoint_refines,
    multiplicity_refines,
    verify_refinement,
)
from ontocheck.syntax import parse_refinement_map

STRICT_FAILURES = {"works at", "arranges work by", "deals with environment",
                   "deals with context category", "is surrounded by", "influences"}

mults = st.builds(
    lambda lo, extra: Multiplicity(lo, None if extra is None else max(lo, 1) + extra),
    st.integers(0, 4), st.one_of(st.none(), st.integers(0, 4)))


@pytest.fixture(scope="module")
def rmap(corpus):
    return parse_refinement_map((corpus / "SituationCO-vs-ThingFO.refmap").read_text())


@pytest.mark.parametrize("lower, upper, default, strict", [
    (Multiplicity(1, 1), Multiplicity(0), True, True),
    (Multiplicity(0), Multiplicity(1), True, False),
    (Multiplicity(1), Multiplicity(1), True, True),
    (Multiplicity(0), Multiplicity(0, 3), False, False),
    (Multiplicity(2, 4), Multiplicity(1, 5), True, True),
])
def test_multiplicity_refines(lower, upper, default, strict):
    assert multiplicity_refines(lower, upper, Mode.DEFAULT) is default
    assert multiplicity_refines(lower, upper, "strict") is strict


@given(mults, mults)
def test_strict_implies_default(lower, upper):
    if multiplicity_refines(lower, upper, Mode.STRICT):
        assert multiplicity_refines(lower, upper, Mode.DEFAULT)


@pytest.mark.parametrize("lower, upper, expected", [
    ("Human Agent", "Thing", True),
    ("Specific Goal", "Assertion on Particulars", True),
    ("Target Entity", "Thing Category", False),
    ("Particular Situation", "Assertion", True),
    ("Situation", "Assertion on Particulars", False),
    ("Natural Environment", "Thing", True),
])
def test_endpoint_refines(ws, sco, thingfo, lower, upper, expected):
    got = endpoint_refines(sco.ref(lower), thingfo.ref(upper), sco, thingfo, ws)
    assert got is expected


def test_endpoint_without_stereotype_fails(ws, sco, thingfo):
    from ontocheck.model import Layer, Ontology, Term, Workspace
    bare = Ontology("Bare", "1", Layer.CORE, terms=(Term("Lonely"),))
    w = Workspace(list(ws) + [bare])
    assert not endpoint_refines(bare.ref("Lonely"), thingfo.ref("Thing"), bare, thingfo, w)
    rmap = RefinementMap("SituationCO", "ThingFO", (RefinementRow("relates", "relates with",
                                                                  "Thing", "Thing"),))
    row = verify_refinement(rmap, ws).rows[0]
    assert row.endpoint_verdicts == (False, False)
    assert any("is not a kind of" in n for n in row.notes)


def test_bundled_matrix_default(ws, rmap):
    report = verify_refinement(rmap, ws)
    assert len(report.rows) == 21 and report.unmapped_lower == ()
    assert all(r.passed for r in report.rows) and report.passed
    assert [r.row.lower for r in report.rows] == [r.name for r in ws["SituationCO"].relationships]


def test_bundled_matrix_strict(ws, rmap):
    report = verify_refinement(rmap, ws, Mode.STRICT)
    assert set(report.failing()) == STRICT_FAILURES
    assert len(report.failing()) == 6
    for r in report.rows:
        assert all(r.endpoint_verdicts)
    assert report.status == "fail"


def test_power_of_qualifier_is_noted(ws, rmap):
    row = next(r for r in verify_refinement(rmap, ws).rows if r.row.lower == "influences")
    assert row.upper_rel.name == "interacts with other"
    assert row.passed
    assert any('"(Power of)"' in n for n in row.notes)


def test_missing_row_is_unmapped(ws, rmap):
    cut = RefinementMap(rmap.lower, rmap.upper,
                        tuple(r for r in rmap.rows if r.lower != "universalizes"))
    report = verify_refinement(cut, ws)
    assert len(report.rows) == 20
    assert report.unmapped_lower == ("universalizes",)
    assert not report.passed


def test_unknown_relationship(ws):
    for row in (RefinementRow("owns", "relates with", "Thing", "Thing"),
                RefinementRow("implies", "owns"),
                RefinementRow("implies", "relates with")):  # overloaded without endpoints
        with pytest.raises(UnknownRelationship):
            verify_refinement(RefinementMap("SituationCO", "ThingFO", (row,)), ws)


@given(st.randoms(use_true_random=False))
def test_permutation_invariance(ws, rmap, rnd):
    rows = list(rmap.rows)
    rnd.shuffle(rows)
    base = {r.row.lower: r for r in verify_refinement(rmap, ws, Mode.STRICT).rows}
    shuffled = verify_refinement(RefinementMap(rmap.lower, rmap.upper, tuple(rows)), ws, Mode.STRICT)
    assert [r.row for r in shuffled.rows] == rows
    for r in shuffled.rows:
        assert r == base[r.row.lower]


@given(st.lists(st.integers(0, 20), unique=True))
def test_default_pass_set_contains_strict(ws, rmap, keep):
    sub = RefinementMap(rmap.lower, rmap.upper, tuple(rmap.rows[i] for i in sorted(keep)))
    default = {r.row.lower for r in verify_refinement(sub, ws).rows if r.passed}
    strict = {r.row.lower for r in verify_refinement(sub, ws, Mode.STRICT).rows if r.passed}
    assert strict <= default


@pytest.mark.parametrize("name", ["SituationCO", "ThingFO"])
def test_self_refinement(ws, name):
    ont = ws[name]
    # lower rows are looked up by name alone, so overloaded names are skipped
    rows = tuple(RefinementRow(r.name, r.name, r.source.name, r.target.name)
                 for r in ont.relationships if len(ont.relationships_named(r.name)) == 1)
    rmap = RefinementMap(name, name, rows)
    for mode in Mode:
        report = verify_refinement(rmap, ws, mode)
        assert report.rows and all(r.passed for r in report.rows), report.failing()
