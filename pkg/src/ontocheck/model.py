"""Ontologies, terms, taxonomies and the workspace that resolves across them."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Optional

if TYPE_CHECKING:
    from .axioms import AxiomRule


class Layer(Enum):
    FOUNDATIONAL = "foundational"
    CORE = "core"
    TOP_DOMAIN = "top_domain"
    LOW_DOMAIN = "low_domain"
    INSTANCE = "instance"

    @property
    def rank(self) -> int:
        return _LAYER_RANKS[self]


_LAYER_RANKS = {layer: i for i, layer in enumerate(Layer)}


class Origin(Enum):
    OWN = "own"
    REUSED = "reused"


class Completeness(Enum):
    COMPLETE = "complete"
    INCOMPLETE = "incomplete"


class Disjointness(Enum):
    DISJOINT = "disjoint"
    OVERLAPPING = "overlapping"


class OntologyError(Exception):
    """Base class for resolution failures against a workspace."""


class TermNotFound(OntologyError, LookupError):
    def __init__(self, name: str, scope: Iterable[str] = (), candidates: Iterable[str] = ()):
        self.name = name
        self.scope = tuple(scope)
        self.candidates = tuple(candidates)
        where = ", ".join(self.scope) or "workspace"
        super().__init__(f"term {name!r} not found in {where}")


class AmbiguousTerm(OntologyError, LookupError):
    def __init__(self, name: str, candidates: Iterable["TermRef"]):
        self.name = name
        self.candidates = tuple(candidates)
        listed = ", ".join(str(c) for c in self.candidates)
        super().__init__(f"term {name!r} is ambiguous: {listed}")


class AmbiguousStereotype(OntologyError):
    def __init__(self, term: "TermRef", candidates: Iterable["TermRef"]):
        self.term = term
        self.candidates = tuple(candidates)
        listed = ", ".join(str(c) for c in self.candidates)
        super().__init__(f"{term} inherits conflicting stereotypes: {listed}")


class UnknownOntology(OntologyError, LookupError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"ontology {name!r} is not loaded")


class UnknownRelationship(OntologyError, LookupError):
    def __init__(self, ontology: str, name: str, candidates: Iterable["RelationshipDef"] = ()):
        self.ontology = ontology
        self.name = name
        self.candidates = tuple(candidates)
        if self.candidates:
            sigs = "; ".join(r.signature() for r in self.candidates)
            msg = f"relationship {name!r} in {ontology} is ambiguous: {sigs}"
        else:
            msg = f"relationship {name!r} not found in {ontology}"
        super().__init__(msg)


@dataclass(frozen=True, order=True)
class TermRef:
    ontology: str
    name: str

    def __str__(self) -> str:
        return f'{self.ontology}."{self.name}"'


@dataclass(frozen=True)
class Multiplicity:
    """Inclusive bounds on a partner count; ``max=None`` is unbounded."""

    min: int
    max: Optional[int] = None

    def __post_init__(self):
        if self.min < 0:
            raise ValueError("multiplicity minimum must be nonnegative")
        if self.max is not None and (self.max < 1 or self.max < self.min):
            raise ValueError(f"invalid multiplicity bounds [{self.min}, {self.max}]")

    @property
    def unbounded(self) -> bool:
        return self.max is None

    def admits(self, count: int) -> bool:
        return count >= self.min and (self.max is None or count <= self.max)

    def __str__(self) -> str:
        if self.max is None:
            return "*" if self.min == 0 else f"{self.min}..*"
        if self.min == self.max:
            return str(self.min)
        return f"{self.min}..{self.max}"


@dataclass(frozen=True)
class Term:
    name: str
    synonyms: tuple[str, ...] = ()
    origin: Origin = Origin.OWN
    stereotype: Optional[TermRef] = None
    qualifier: Optional[str] = None


@dataclass(frozen=True)
class TaxonomicLink:
    child: str
    parent: str


@dataclass(frozen=True)
class GeneralizationSet:
    parent: str
    children: tuple[str, ...]
    completeness: Completeness = Completeness.INCOMPLETE
    disjointness: Disjointness = Disjointness.OVERLAPPING

    @property
    def complete(self) -> bool:
        return self.completeness is Completeness.COMPLETE

    @property
    def disjoint(self) -> bool:
        return self.disjointness is Disjointness.DISJOINT


@dataclass(frozen=True)
class RelationshipDef:
    name: str
    source: TermRef
    target: TermRef
    # partners of the source term per target instance, and vice versa
    source_mult: Multiplicity = Multiplicity(0)
    target_mult: Multiplicity = Multiplicity(0)
    definition: str = ""
    source_qualifier: Optional[str] = None
    target_qualifier: Optional[str] = None

    def signature(self) -> str:
        return f'"{self.source.name}" "{self.name}" "{self.target.name}"'


@dataclass(frozen=True)
class Import:
    name: str
    layer: Layer


@dataclass(frozen=True)
class Ontology:
    name: str
    version: str
    layer: Layer
    imports: tuple[Import, ...] = ()
    terms: tuple[Term, ...] = ()
    taxonomic_links: tuple[TaxonomicLink, ...] = ()
    generalization_sets: tuple[GeneralizationSet, ...] = ()
    relationships: tuple[RelationshipDef, ...] = ()
    axioms: tuple["AxiomRule", ...] = ()
    # camelCase spellings used in axiom atoms -> relationship names
    aliases: tuple[tuple[str, str], ...] = ()
    spans: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @cached_property
    def _terms_by_name(self) -> dict[str, Term]:
        return {t.name: t for t in self.terms}

    @cached_property
    def _lookup(self) -> dict[str, str]:
        names = {t.name: t.name for t in self.terms}
        for t in self.terms:
            for syn in t.synonyms:
                names.setdefault(syn, t.name)
        return names

    @cached_property
    def parents(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {}
        for link in self.taxonomic_links:
            out.setdefault(link.child, []).append(link.parent)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def _descendants(self) -> dict[str, frozenset[str]]:
        children: dict[str, list[str]] = {}
        for link in self.taxonomic_links:
            children.setdefault(link.parent, []).append(link.child)
        out = {}
        for name in self._terms_by_name:
            seen = {name}
            todo = [name]
            while todo:
                for c in children.get(todo.pop(), ()):
                    if c not in seen:
                        seen.add(c)
                        todo.append(c)
            out[name] = frozenset(seen)
        return out

    def ref(self, name: str) -> TermRef:
        return TermRef(self.name, name)

    def term(self, name: str) -> Term:
        """Look up a term by canonical name or synonym."""
        try:
            return self._terms_by_name[self._lookup[name]]
        except KeyError:
            raise TermNotFound(name, [self.name]) from None

    def has_term(self, name: str) -> bool:
        return name in self._lookup

    def canonical(self, name: str) -> str:
        return self.term(name).name

    def descendants(self, name: str) -> frozenset[str]:
        """Reflexive-transitive subtypes of ``name``."""
        return self._descendants[self.canonical(name)]

    def relationships_named(self, name: str) -> list[RelationshipDef]:
        return [r for r in self.relationships if r.name == name]

    def relationship(self, name: str, source: Optional[str] = None,
                     target: Optional[str] = None) -> RelationshipDef:
        """Find a relationship by name, narrowed by endpoint names when overloaded."""
        found = self.relationships_named(name)
        if source is not None:
            found = [r for r in found if r.source.name == source]
        if target is not None:
            found = [r for r in found if r.target.name == target]
        if len(found) == 1:
            return found[0]
        raise UnknownRelationship(self.name, name, found)

    def alias_target(self, alias: str) -> Optional[str]:
        return dict(self.aliases).get(alias)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    subject: str
    message: str
    severity: str = "error"

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "subjects": [self.subject],
            "message": self.message,
        }


class Workspace:
    """A set of uniquely named ontologies resolved against each other by name."""

    def __init__(self, ontologies: Iterable[Ontology] = ()):
        self._ontologies: dict[str, Ontology] = {}
        for ont in ontologies:
            if ont.name in self._ontologies:
                raise ValueError(f"duplicate ontology name {ont.name!r} in workspace")
            self._ontologies[ont.name] = ont

    def __contains__(self, name: str) -> bool:
        return name in self._ontologies

    def __getitem__(self, name: str) -> Ontology:
        try:
            return self._ontologies[name]
        except KeyError:
            raise UnknownOntology(name) from None

    def __iter__(self):
        return iter(self._ontologies.values())

    def __len__(self) -> int:
        return len(self._ontologies)

    def missing_imports(self) -> list[tuple[str, str]]:
        """(importer, imported) pairs whose target is not loaded."""
        return [(o.name, imp.name) for o in self for imp in o.imports
                if imp.name not in self._ontologies]

    def term(self, ref: TermRef) -> Term:
        return self[ref.ontology].term(ref.name)

    def resolve_term(self, name: str, ontology: Optional[str] = None) -> TermRef:
        """Resolve a name or synonym to its canonical term.

        With ``ontology`` set the lookup is confined to that ontology,
        otherwise every loaded ontology is searched and a name matching in
        more than one raises :class:`AmbiguousTerm`.
        """
        scope = [self[ontology]] if ontology is not None else list(self)
        hits = [o.ref(o.canonical(name)) for o in scope if o.has_term(name)]
        if not hits:
            near = sorted({t.name for o in scope for t in o.terms
                           if name.lower() in t.name.lower()})
            raise TermNotFound(name, [o.name for o in scope], near)
        if len(hits) > 1:
            raise AmbiguousTerm(name, hits)
        return hits[0]

    def subsumes(self, ancestor: TermRef, descendant: TermRef) -> bool:
        """True iff ``descendant`` reaches ``ancestor`` by zero or more is-a links."""
        anc_ont = self[ancestor.ontology]
        desc_ont = self[descendant.ontology]
        a = anc_ont.canonical(ancestor.name)
        d = desc_ont.canonical(descendant.name)
        if ancestor.ontology != descendant.ontology:
            return False
        return d in anc_ont.descendants(a)

    def effective_stereotype(self, ref: TermRef) -> Optional[TermRef]:
        """The term's own stereotype, else the nearest ancestor's (breadth-first)."""
        ont = self[ref.ontology]
        start = ont.canonical(ref.name)
        level = [start]
        seen = {start}
        while level:
            found = {ont.term(n).stereotype for n in level} - {None}
            if len(found) == 1:
                return found.pop()
            if len(found) > 1:
                raise AmbiguousStereotype(ont.ref(start), sorted(found))
            nxt = []
            for n in level:
                for p in ont.parents.get(n, ()):
                    if p not in seen and ont.has_term(p):
                        seen.add(p)
                        nxt.append(p)
            level = nxt
        return None


def _taxonomy_cycles(ont: Ontology) -> list[list[str]]:
    """Strongly connected components of the is-a graph that contain a cycle."""
    graph: dict[str, list[str]] = {}
    for link in ont.taxonomic_links:
        graph.setdefault(link.child, []).append(link.parent)
        graph.setdefault(link.parent, [])
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    out: list[list[str]] = []
    counter = 0

    # iterative Tarjan; recursion depth is unbounded on long chains
    for root in graph:
        if root in index:
            continue
        work = [(root, iter(graph[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(graph[nxt])))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    n = stack.pop()
                    on_stack.discard(n)
                    comp.append(n)
                    if n == node:
                        break
                if len(comp) > 1 or node in graph[node]:
                    out.append(sorted(comp))
    return out


def check_ontology_wellformedness(ontology: Ontology, workspace: Workspace) -> list[Diagnostic]:
    """Structural and layering checks; returns diagnostics sorted by (code, subject)."""
    diags: list[Diagnostic] = []

    def add(code: str, subject: str, message: str) -> None:
        diags.append(Diagnostic(code, subject, message))

    imported = {imp.name: imp for imp in ontology.imports}

    if ontology.layer is Layer.FOUNDATIONAL:
        if ontology.imports:
            add("FOUNDATIONAL_IMPORTS", ontology.name,
                "a foundational ontology cannot import other ontologies")
        others = [o.name for o in workspace
                  if o.layer is Layer.FOUNDATIONAL and o.name != ontology.name]
        if others:
            add("MULTIPLE_FOUNDATIONAL", ontology.name,
                f"workspace holds other foundational ontologies: {', '.join(sorted(others))}")

    for imp in ontology.imports:
        if imp.name not in workspace:
            add("UNRESOLVED_IMPORT", imp.name, f"{ontology.name} imports {imp.name}, which is not loaded")
            continue
        actual = workspace[imp.name].layer
        if actual is not imp.layer:
            add("IMPORT_LAYER_MISMATCH", imp.name,
                f"import declares layer {imp.layer.value} but {imp.name} is {actual.value}")
        if actual.rank > ontology.layer.rank:
            add("LAYER_VIOLATION", imp.name,
                f"{ontology.name} ({ontology.layer.value}) imports lower-level "
                f"{imp.name} ({actual.value})")

    for comp in _taxonomy_cycles(ontology):
        add("TAXONOMY_CYCLE", comp[0], "is-a cycle through " + " -> ".join(comp))

    def resolves(ref: TermRef, what: str, subject: str) -> bool:
        if ref.ontology == ontology.name:
            ok = ontology.has_term(ref.name)
        elif ref.ontology not in imported:
            add("UNRESOLVED_REFERENCE", subject,
                f"{what} {ref} names an ontology that {ontology.name} does not import")
            return False
        else:
            ok = ref.ontology in workspace and workspace[ref.ontology].has_term(ref.name)
        if not ok:
            add("UNRESOLVED_REFERENCE", subject, f"{what} {ref} does not resolve")
        return ok

    for term in ontology.terms:
        st = term.stereotype
        if st is None:
            continue
        if st.ontology == ontology.name:
            add("LAYER_VIOLATION", term.name,
                f"stereotype {st} must come from another, higher-level ontology")
            continue
        if not resolves(st, "stereotype", term.name):
            continue
        source_rank = workspace[st.ontology].layer.rank
        own_rank = ontology.layer.rank
        if term.origin is Origin.OWN and source_rank >= own_rank:
            add("LAYER_VIOLATION", term.name,
                f"stereotype {st} is not from a strictly higher layer")
        elif term.origin is Origin.REUSED and source_rank > own_rank:
            add("LAYER_VIOLATION", term.name,
                f"reused term source {st} is from a lower layer")

    for term in ontology.terms:
        try:
            workspace.effective_stereotype(ontology.ref(term.name))
        except AmbiguousStereotype as exc:
            add("AMBIGUOUS_STEREOTYPE", term.name, str(exc))
        except OntologyError:
            pass

    links = set(ontology.taxonomic_links)
    for gs in ontology.generalization_sets:
        for child in gs.children:
            if TaxonomicLink(child, gs.parent) not in links:
                add("GENSET_NOT_SUBTYPE", child,
                    f'"{child}" is in a generalization set of "{gs.parent}" without an is-a link to it')

    for rel in ontology.relationships:
        resolves(rel.source, f'source of "{rel.name}"', rel.name)
        resolves(rel.target, f'target of "{rel.name}"', rel.name)

    for rule in ontology.axioms:
        for _, guard in rule.guards():
            resolves(guard, f"guard of axiom {rule.id}", rule.id)

    diags.sort(key=lambda d: (d.code, d.subject, d.message))
    return diags
