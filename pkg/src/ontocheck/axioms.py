"""Guarded first-order rules over finite instance models.

A rule universally quantifies typed variables, requires a conjunction of
relationship atoms, and demands a head: one atom, one negated atom, or a
single existential block. Violations come back as witnesses, i.e. the
universal assignments that satisfy the body but not the head.

Two evaluators share that contract. :func:`evaluate_axiom` joins over the
link indexes; :func:`evaluate_axiom_naive` enumerates every assignment and
exists only to cross-check the first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator, Mapping, Optional, Union

from .model import OntologyError, TermRef, Workspace

if TYPE_CHECKING:
    from .instances import InstanceModel, Interpretation


class RuleError(OntologyError):
    pass


@dataclass(frozen=True)
class RelationAtom:
    relationship: str
    left: str
    right: str


@dataclass(frozen=True)
class NegatedAtom:
    atom: RelationAtom


@dataclass(frozen=True)
class ExistentialBlock:
    variable: str
    guard: TermRef
    atoms: tuple[RelationAtom, ...]


Head = Union[RelationAtom, NegatedAtom, ExistentialBlock]


@dataclass(frozen=True)
class AxiomRule:
    id: str
    universals: tuple[tuple[str, TermRef], ...]
    body: tuple[RelationAtom, ...]
    head: Head

    def __post_init__(self):
        declared = [v for v, _ in self.universals]
        if len(set(declared)) != len(declared):
            raise ValueError(f"axiom {self.id}: variable declared twice")
        scope = set(declared)
        for atom in self.body:
            _require_vars(self.id, atom, scope)
        if isinstance(self.head, ExistentialBlock):
            if self.head.variable in scope:
                raise ValueError(f"axiom {self.id}: existential variable shadows a universal")
            for atom in self.head.atoms:
                _require_vars(self.id, atom, scope | {self.head.variable})
        else:
            _require_vars(self.id, _head_atom(self.head), scope)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.universals)

    def guards(self) -> list[tuple[str, TermRef]]:
        out = list(self.universals)
        if isinstance(self.head, ExistentialBlock):
            out.append((self.head.variable, self.head.guard))
        return out

    def atoms(self) -> list[RelationAtom]:
        out = list(self.body)
        if isinstance(self.head, ExistentialBlock):
            out.extend(self.head.atoms)
        else:
            out.append(_head_atom(self.head))
        return out


def _head_atom(head: Head) -> RelationAtom:
    return head.atom if isinstance(head, NegatedAtom) else head


def _require_vars(rule_id: str, atom: RelationAtom, scope: set[str]) -> None:
    for v in (atom.left, atom.right):
        if v not in scope:
            raise ValueError(f"axiom {rule_id}: variable {v!r} is not declared")


@dataclass(frozen=True, order=True)
class Witness:
    """An assignment of every universal variable to a node id, in rule order."""

    bindings: tuple[tuple[str, str], ...]

    @classmethod
    def of(cls, rule: AxiomRule, assignment: Mapping[str, str]) -> "Witness":
        return cls(tuple((v, assignment[v]) for v in rule.variables))

    def as_dict(self) -> dict[str, str]:
        return dict(self.bindings)

    def __getitem__(self, var: str) -> str:
        return self.as_dict()[var]


def check_rule(rule: AxiomRule, workspace: Workspace, ontology: str) -> None:
    """Raise :class:`RuleError` if a guard or relationship does not resolve."""
    ont = workspace[ontology]
    for var, guard in rule.guards():
        if guard.ontology not in workspace or not workspace[guard.ontology].has_term(guard.name):
            raise RuleError(f"axiom {rule.id}: guard {guard} of {var!r} does not resolve")
    for atom in rule.atoms():
        if not ont.relationships_named(atom.relationship):
            raise RuleError(f"axiom {rule.id}: relationship {atom.relationship!r} "
                            f"not found in {ontology}")


def evaluate_axiom(rule: AxiomRule, model: "InstanceModel", workspace: Workspace,
                   interp: Optional["Interpretation"] = None) -> list[Witness]:
    from .instances import Interpretation

    check_rule(rule, workspace, model.conforms_to)
    if interp is None:
        interp = Interpretation(model, workspace)
    ranges = {v: interp.instances_of(g) for v, g in rule.universals}
    if any(not r for r in ranges.values()):
        return []

    out = [Witness.of(rule, b) for b in _join(rule.body, ranges, model)
           if not _head_holds(rule.head, b, model, interp)]
    out.sort()
    return out


def _join(atoms, ranges: dict[str, frozenset[str]], model: "InstanceModel") -> Iterator[dict]:
    """All assignments over ``ranges`` satisfying every atom."""
    pending = list(atoms)
    bindings: list[dict[str, str]] = [{}]
    while pending and bindings:
        bound = bindings[0].keys()
        # most constrained first: atoms with bound vars, then the fewest links
        pending.sort(key=lambda a: (-((a.left in bound) + (a.right in bound)),
                                    len(model.links_of(a.relationship))))
        atom = pending.pop(0)
        bindings = list(_extend(atom, bindings, ranges, model))
    for b in bindings:
        free = [v for v in ranges if v not in b]
        for combo in itertools.product(*(sorted(ranges[v]) for v in free)):
            yield {**b, **dict(zip(free, combo))}


def _extend(atom: RelationAtom, bindings, ranges, model: "InstanceModel"):
    rel, x, y = atom.relationship, atom.left, atom.right
    out_idx, in_idx = model._out, model._in
    for b in bindings:
        if x in b and y in b:
            if b[y] in out_idx.get((rel, b[x]), ()):
                yield b
        elif x in b:
            for t in out_idx.get((rel, b[x]), ()):
                if t in ranges[y]:
                    yield {**b, y: t}
        elif y in b:
            for s in in_idx.get((rel, b[y]), ()):
                if s in ranges[x]:
                    yield {**b, x: s}
        else:
            for link in model.links_of(rel):
                if link.source not in ranges[x] or link.target not in ranges[y]:
                    continue
                if x == y:
                    if link.source == link.target:
                        yield {**b, x: link.source}
                else:
                    yield {**b, x: link.source, y: link.target}


def _head_holds(head: Head, b: dict[str, str], model: "InstanceModel", interp) -> bool:
    if isinstance(head, RelationAtom):
        return model.has_link(head.relationship, b[head.left], b[head.right])
    if isinstance(head, NegatedAtom):
        a = head.atom
        return not model.has_link(a.relationship, b[a.left], b[a.right])
    ranges = {head.variable: interp.instances_of(head.guard)}
    seeded = [{**b}]
    for atom in head.atoms:
        seeded = list(_extend(atom, seeded, {**ranges, **{k: frozenset([v]) for k, v in b.items()}},
                              model))
        if not seeded:
            return False
    if any(head.variable in s for s in seeded):
        return True
    # the block's atoms never mention its variable
    return bool(ranges[head.variable])


def evaluate_axiom_naive(rule: AxiomRule, model: "InstanceModel",
                         workspace: Workspace) -> list[Witness]:
    """Reference evaluator: every assignment, every atom by linear scan."""
    check_rule(rule, workspace, model.conforms_to)
    ont = workspace[model.conforms_to]
    node_ids = [n.id for n in model.nodes]
    links = list(model.links)

    def canon(name: str) -> str:
        return ont.term(name).name

    def is_a(node_id: str, guard: TermRef) -> bool:
        node = next(n for n in model.nodes if n.id == node_id)
        target = workspace[guard.ontology].term(guard.name).name
        for asserted in node.asserted_terms:
            if guard.ontology != ont.name:
                continue
            frontier = [canon(asserted)]
            seen = set()
            while frontier:
                cur = frontier.pop()
                if cur == target:
                    return True
                seen.add(cur)
                frontier.extend(l.parent for l in ont.taxonomic_links
                                if l.child == cur and l.parent not in seen)
        return False

    def holds(atom: RelationAtom, env: dict[str, str]) -> bool:
        s, t = env[atom.left], env[atom.right]
        return any(l.relationship == atom.relationship and l.source == s and l.target == t
                   for l in links)

    def head_true(env: dict[str, str]) -> bool:
        head = rule.head
        if isinstance(head, RelationAtom):
            return holds(head, env)
        if isinstance(head, NegatedAtom):
            return not holds(head.atom, env)
        for w in node_ids:
            inner = {**env, head.variable: w}
            if is_a(w, head.guard) and all(holds(a, inner) for a in head.atoms):
                return True
        return False

    out = []
    for combo in itertools.product(node_ids, repeat=len(rule.universals)):
        env = dict(zip(rule.variables, combo))
        if not all(is_a(env[v], g) for v, g in rule.universals):
            continue
        if all(holds(a, env) for a in rule.body) and not head_true(env):
            out.append(Witness.of(rule, env))
    out.sort()
    return out
