"""Finite typed instance graphs and taxonomy-aware membership queries."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable

from .model import Ontology, RelationshipDef, TermRef, Workspace


class Direction(Enum):
    OUTGOING = "outgoing"
    INCOMING = "incoming"


class UnknownNode(LookupError):
    pass


@dataclass(frozen=True)
class InstanceNode:
    id: str
    asserted_terms: tuple[str, ...]

    def __post_init__(self):
        if not self.asserted_terms:
            raise ValueError(f"node {self.id!r} asserts no term")


@dataclass(frozen=True, order=True)
class InstanceLink:
    relationship: str
    source: str
    target: str


@dataclass(frozen=True)
class InstanceModel:
    """A closed-world micro-world: nodes plus a set of relationship links.

    Duplicate links collapse to one, keeping first-seen order.
    """

    name: str
    conforms_to: str
    nodes: tuple[InstanceNode, ...] = ()
    links: tuple[InstanceLink, ...] = ()
    warnings: tuple = field(default=(), compare=False, hash=False, repr=False)

    def __post_init__(self):
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise ValueError(f"duplicate node id {dup!r}")
        known = set(ids)
        for link in self.links:
            for end in (link.source, link.target):
                if end not in known:
                    raise ValueError(f"link {link.relationship!r} references undeclared node {end!r}")
        object.__setattr__(self, "links", tuple(dict.fromkeys(self.links)))

    @cached_property
    def node_map(self) -> dict[str, InstanceNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def _out(self) -> dict[tuple[str, str], frozenset[str]]:
        idx: dict[tuple[str, str], set[str]] = {}
        for link in self.links:
            idx.setdefault((link.relationship, link.source), set()).add(link.target)
        return {k: frozenset(v) for k, v in idx.items()}

    @cached_property
    def _in(self) -> dict[tuple[str, str], frozenset[str]]:
        idx: dict[tuple[str, str], set[str]] = {}
        for link in self.links:
            idx.setdefault((link.relationship, link.target), set()).add(link.source)
        return {k: frozenset(v) for k, v in idx.items()}

    @cached_property
    def _by_relationship(self) -> dict[str, tuple[InstanceLink, ...]]:
        idx: dict[str, list[InstanceLink]] = {}
        for link in self.links:
            idx.setdefault(link.relationship, []).append(link)
        return {k: tuple(v) for k, v in idx.items()}

    def links_of(self, relationship: str) -> tuple[InstanceLink, ...]:
        return self._by_relationship.get(relationship, ())

    def has_link(self, relationship: str, source: str, target: str) -> bool:
        return target in self._out.get((relationship, source), ())

    def without_links(self, drop: Iterable[InstanceLink]) -> "InstanceModel":
        gone = set(drop)
        return InstanceModel(self.name, self.conforms_to, self.nodes,
                             tuple(l for l in self.links if l not in gone))


def partners(model: InstanceModel, relationship: str, node: str,
             direction: Direction | str = Direction.OUTGOING) -> frozenset[str]:
    if node not in model.node_map:
        raise UnknownNode(node)
    direction = Direction(direction)
    index = model._out if direction is Direction.OUTGOING else model._in
    return index.get((relationship, node), frozenset())


class Interpretation:
    """An instance model bound to the ontology it conforms to.

    Node terms are resolved once; term extensions are memoized.
    """

    def __init__(self, model: InstanceModel, workspace: Workspace):
        self.model = model
        self.workspace = workspace
        self.ontology: Ontology = workspace[model.conforms_to]
        self.types: dict[str, frozenset[TermRef]] = {
            n.id: frozenset(workspace.resolve_term(t, self.ontology.name) for t in n.asserted_terms)
            for n in model.nodes
        }
        self._ext: dict[TermRef, frozenset[str]] = {}

    def instances_of(self, term: TermRef) -> frozenset[str]:
        ont = self.workspace[term.ontology]
        term = ont.ref(ont.canonical(term.name))
        hit = self._ext.get(term)
        if hit is None:
            if term.ontology == self.ontology.name:
                below = {self.ontology.ref(n) for n in self.ontology.descendants(term.name)}
            else:
                below = {term}
            hit = frozenset(nid for nid, ts in self.types.items() if ts & below)
            self._ext[term] = hit
        return hit

    def relationship(self, name: str) -> RelationshipDef:
        return self.ontology.relationship(name)


def instances_of(model: InstanceModel, term: TermRef, workspace: Workspace) -> frozenset[str]:
    """Nodes asserting ``term`` or any of its subtypes."""
    return Interpretation(model, workspace).instances_of(term)
