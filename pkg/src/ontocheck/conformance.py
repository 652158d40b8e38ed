"""Closed-world validation of an instance model against its ontology."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .axioms import Witness, evaluate_axiom
from .instances import InstanceModel, Interpretation
from .model import Workspace


class Mode(Enum):
    COMPLETE = "complete"
    PARTIAL = "partial"


@dataclass(frozen=True)
class ValidationOptions:
    # partial drops minimum-multiplicity and completeness checks
    mode: Mode = Mode.COMPLETE

    @property
    def partial(self) -> bool:
        return self.mode is Mode.PARTIAL


@dataclass(frozen=True)
class Violation:
    code: str
    subjects: tuple[str, ...]
    message: str
    witness: Optional[Witness] = None
    severity: str = "error"

    def __post_init__(self):
        if not self.subjects:
            raise ValueError("a violation needs at least one subject")

    def sort_key(self):
        return (self.code, self.subjects, self.message, self.witness or Witness(()))

    def to_dict(self) -> dict:
        d = {
            "code": self.code,
            "severity": self.severity,
            "subjects": list(self.subjects),
            "message": self.message,
        }
        if self.witness is not None:
            d["witness"] = self.witness.as_dict()
        return d


@dataclass(frozen=True)
class Report:
    diagnostics: tuple = ()
    title: str = field(default="", compare=False)

    @property
    def status(self) -> str:
        return "fail" if self.diagnostics else "pass"

    @property
    def passed(self) -> bool:
        return not self.diagnostics

    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]

    def to_dict(self) -> dict:
        return {"status": self.status, "diagnostics": [d.to_dict() for d in self.diagnostics]}


def _interp(model, workspace, interp) -> Interpretation:
    return interp if interp is not None else Interpretation(model, workspace)


def _well_typed(interp: Interpretation):
    """Split links into (well typed, typing violations)."""
    ok, bad = [], []
    for link in interp.model.links:
        rel = interp.relationship(link.relationship)
        good = True
        for end, node, term in (("source", link.source, rel.source),
                                ("target", link.target, rel.target)):
            if node not in interp.instances_of(term):
                good = False
                bad.append(Violation(
                    "TYPE_MISMATCH", (node, rel.name),
                    f'{end} {node} of "{rel.name}" link {link.source} -> {link.target} '
                    f'is not a "{term.name}"'))
        if good:
            ok.append(link)
    return ok, bad


def check_typing(model: InstanceModel, workspace: Workspace,
                 interp: Optional[Interpretation] = None) -> list[Violation]:
    return sorted(_well_typed(_interp(model, workspace, interp))[1], key=Violation.sort_key)


def check_multiplicities(model: InstanceModel, workspace: Workspace,
                         options: ValidationOptions = ValidationOptions(),
                         interp: Optional[Interpretation] = None) -> list[Violation]:
    """Per-node partner counts against both ends of every relationship.

    Ill-typed links are left out of the counts; check_typing reports them.
    """
    interp = _interp(model, workspace, interp)
    good, _ = _well_typed(interp)
    out: dict[tuple[str, str], int] = {}
    inc: dict[tuple[str, str], int] = {}
    for link in good:
        out[(link.relationship, link.source)] = out.get((link.relationship, link.source), 0) + 1
        inc[(link.relationship, link.target)] = inc.get((link.relationship, link.target), 0) + 1

    found = []
    for rel in interp.ontology.relationships:
        for node_term, counts, mult, side in (
            (rel.source, out, rel.target_mult, "target"),
            (rel.target, inc, rel.source_mult, "source"),
        ):
            for node in sorted(interp.instances_of(node_term)):
                n = counts.get((rel.name, node), 0)
                what = (f'{node} has {n} "{rel.name}" {side} partner(s), allowed {mult}')
                if n < mult.min and not options.partial:
                    found.append(Violation("MULT_MIN", (node, rel.name), what))
                elif mult.max is not None and n > mult.max:
                    found.append(Violation("MULT_MAX", (node, rel.name), what))
    return sorted(found, key=Violation.sort_key)


def check_generalization_sets(model: InstanceModel, workspace: Workspace,
                              options: ValidationOptions = ValidationOptions(),
                              interp: Optional[Interpretation] = None) -> list[Violation]:
    interp = _interp(model, workspace, interp)
    ont = interp.ontology
    found = []
    for gs in ont.generalization_sets:
        members = interp.instances_of(ont.ref(gs.parent))
        exts = {c: interp.instances_of(ont.ref(c)) for c in gs.children}
        for node in sorted(members):
            inside = [c for c in gs.children if node in exts[c]]
            if gs.disjoint and len(inside) > 1:
                found.append(Violation(
                    "GENSET_DISJOINT", (node, gs.parent),
                    f'{node} is in disjoint subtypes of "{gs.parent}": ' + ", ".join(inside)))
            if gs.complete and not options.partial and not inside:
                found.append(Violation(
                    "GENSET_INCOMPLETE", (node, gs.parent),
                    f'{node} is a "{gs.parent}" but in none of: ' + ", ".join(gs.children)))
    return sorted(found, key=Violation.sort_key)


def check_axioms(model: InstanceModel, workspace: Workspace,
                 interp: Optional[Interpretation] = None) -> list[Violation]:
    interp = _interp(model, workspace, interp)
    found = []
    for rule in interp.ontology.axioms:
        for w in evaluate_axiom(rule, model, workspace, interp):
            found.append(Violation(
                f"AXIOM_{rule.id}", tuple(node for _, node in w.bindings) or (rule.id,),
                f"axiom {rule.id} fails for " + ", ".join(f"{v}={n}" for v, n in w.bindings),
                witness=w))
    return sorted(found, key=Violation.sort_key)


def validate(model: InstanceModel, workspace: Workspace,
             options: ValidationOptions = ValidationOptions(),
             checks: Sequence[str] = ("typing", "multiplicity", "genset", "axioms")) -> Report:
    """Run every check and merge into one canonically ordered report.

    Raises UnknownOntology if the model conforms to an ontology that is not
    loaded, and the usual lookup errors for unknown terms or relationships.
    """
    interp = Interpretation(model, workspace)
    for link in model.links:
        interp.relationship(link.relationship)
    found: list[Violation] = []
    if "typing" in checks:
        found += check_typing(model, workspace, interp)
    if "multiplicity" in checks:
        found += check_multiplicities(model, workspace, options, interp)
    if "genset" in checks:
        found += check_generalization_sets(model, workspace, options, interp)
    if "axioms" in checks:
        found += check_axioms(model, workspace, interp)
    return Report(tuple(sorted(found, key=Violation.sort_key)), title=model.name)
