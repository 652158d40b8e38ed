"""Checks that a lower ontology's relationships refine declared upper ones."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .model import (
    AmbiguousStereotype,
    Multiplicity,
    Ontology,
    RelationshipDef,
    TermRef,
    Workspace,
)


class Mode(Enum):
    DEFAULT = "default"
    STRICT = "strict"


@dataclass(frozen=True)
class RefinementRow:
    lower: str
    upper: str
    # endpoint names disambiguate an overloaded upper relationship name
    upper_source: Optional[str] = None
    upper_target: Optional[str] = None


@dataclass(frozen=True)
class RefinementMap:
    lower: str
    upper: str
    rows: tuple[RefinementRow, ...] = ()


@dataclass(frozen=True)
class RowResult:
    row: RefinementRow
    lower_rel: RelationshipDef
    upper_rel: RelationshipDef
    endpoint_verdicts: tuple[bool, bool]
    multiplicity_verdicts: tuple[bool, bool]
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(self.endpoint_verdicts) and all(self.multiplicity_verdicts)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


@dataclass(frozen=True)
class MatrixReport:
    rows: tuple[RowResult, ...]
    unmapped_lower: tuple[str, ...]
    mode: Mode = Mode.DEFAULT
    lower: str = ""
    upper: str = ""

    @property
    def passed(self) -> bool:
        return not self.unmapped_lower and all(r.passed for r in self.rows)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def failing(self) -> list[str]:
        return [r.row.lower for r in self.rows if not r.passed]


def multiplicity_refines(lower: Multiplicity, upper: Multiplicity,
                         mode: Mode | str = Mode.DEFAULT) -> bool:
    """Default: the lower maximum fits under the upper one. Strict: interval containment."""
    mode = Mode(mode)
    inf = float("inf")
    lo_max = inf if lower.max is None else lower.max
    up_max = inf if upper.max is None else upper.max
    if lo_max > up_max:
        return False
    if mode is Mode.STRICT and lower.min < upper.min:
        return False
    return True


def _lift(term: TermRef, upper: Ontology, workspace: Workspace) -> TermRef:
    """Follow stereotypes from ``term`` until landing in ``upper``.

    Raises LookupError('NO_STEREOTYPE') when the chain ends first.
    """
    seen = set()
    cur: Optional[TermRef] = term
    while cur is not None and cur.ontology != upper.name:
        if cur in seen:
            break
        seen.add(cur)
        cur = workspace.effective_stereotype(cur)
    if cur is None or cur.ontology != upper.name:
        raise LookupError("NO_STEREOTYPE")
    return cur


def _endpoint(lower_term: TermRef, upper_term: TermRef, upper: Ontology,
              workspace: Workspace) -> tuple[bool, Optional[str]]:
    try:
        lifted = _lift(lower_term, upper, workspace)
    except LookupError:
        return False, f'NO_STEREOTYPE: "{lower_term.name}" has no stereotype reaching {upper.name}'
    except AmbiguousStereotype as exc:
        return False, f"AMBIGUOUS_STEREOTYPE: {exc}"
    if not upper.has_term(lifted.name):
        return False, f"UNRESOLVED: {lifted} is not a term of {upper.name}"
    ok = workspace.subsumes(upper_term, lifted)
    if ok:
        return True, None
    return False, f'"{lower_term.name}" ({lifted.name}) is not a kind of "{upper_term.name}"'


def endpoint_refines(lower_term: TermRef, upper_term: TermRef, lower: Ontology,
                     upper: Ontology, workspace: Optional[Workspace] = None) -> bool:
    """True iff the lower term's stereotype chain lands under ``upper_term``."""
    if workspace is None:
        workspace = Workspace([lower] if lower is upper else [lower, upper])
    return _endpoint(lower_term, upper_term, upper, workspace)[0]


def _resolve_upper(upper: Ontology, row: RefinementRow) -> RelationshipDef:
    if row.upper_source is None:
        return upper.relationship(row.upper)
    src = upper.canonical(row.upper_source) if upper.has_term(row.upper_source) else row.upper_source
    tgt = upper.canonical(row.upper_target) if upper.has_term(row.upper_target) else row.upper_target
    return upper.relationship(row.upper, src, tgt)


def verify_refinement(rmap: RefinementMap, workspace: Workspace,
                      mode: Mode | str = Mode.DEFAULT,
                      lower: Optional[str] = None, upper: Optional[str] = None) -> MatrixReport:
    """One verdict per map row, plus the lower relationships the map leaves out.

    Raises :class:`UnknownRelationship` for a row naming a relationship that
    does not exist (or is ambiguous) on either side.
    """
    mode = Mode(mode)
    low = workspace[lower or rmap.lower]
    up = workspace[upper or rmap.upper]
    results = []
    for row in rmap.rows:
        lrel = low.relationship(row.lower)
        urel = _resolve_upper(up, row)
        notes = []
        verdicts = []
        for lt, ut, uq, end in ((lrel.source, urel.source, urel.source_qualifier, "source"),
                                (lrel.target, urel.target, urel.target_qualifier, "target")):
            ok, why = _endpoint(lt, ut, up, workspace)
            verdicts.append(ok)
            if uq is not None:
                notes.append(f'{end} qualifier "({uq})" ignored for subsumption')
            if why:
                notes.append(f"{end}: {why}")
        mults = []
        for lm, um, end in ((lrel.source_mult, urel.source_mult, "source"),
                            (lrel.target_mult, urel.target_mult, "target")):
            ok = multiplicity_refines(lm, um, mode)
            mults.append(ok)
            if not ok:
                notes.append(f"{end} multiplicity {lm} does not refine {um} ({mode.value})")
        results.append(RowResult(row, lrel, urel, tuple(verdicts), tuple(mults), tuple(notes)))
    mapped = {r.lower for r in rmap.rows}
    unmapped = tuple(dict.fromkeys(r.name for r in low.relationships if r.name not in mapped))
    return MatrixReport(tuple(results), unmapped, mode, low.name, up.name)

