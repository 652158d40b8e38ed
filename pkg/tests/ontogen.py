"""Seeded generator of syntactically valid ontologies for round-trip fuzzing."""

import random

from ontocheck.axioms import AxiomRule, ExistentialBlock, NegatedAtom, RelationAtom
from ontocheck.model import (
    Completeness,
    Disjointness,
    GeneralizationSet,
    Import,
    Layer,
    Multiplicity,
    Ontology,
    Origin,
    RelationshipDef,
    TaxonomicLink,
    Term,
    TermRef,
)

_CHARS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-.#[]{}():,&=\"\\\t\néß→漢"


def _text(rng, lo=1, hi=12):
    body = "".join(rng.choice(_CHARS) for _ in range(rng.randint(lo - 1, hi - 1)))
    return rng.choice("abcXYZé") + body


def _ident(rng):
    return rng.choice("abcdefgxyz_") + "".join(
        rng.choice("abcdefghijklmnopqrstuvwxyz0123456789_") for _ in range(rng.randint(0, 6)))


def _mult(rng):
    lo = rng.randint(0, 3)
    if rng.random() < 0.5:
        return Multiplicity(lo, None)
    return Multiplicity(lo, max(lo, 1) + rng.randint(0, 3))


def random_ontology(rng: random.Random) -> Ontology:
    name = rng.choice([_ident(rng), _text(rng)])
    used: set[str] = {name}

    def fresh(gen):
        while True:
            s = gen(rng)
            if s not in used:
                used.add(s)
                return s

    imports = tuple(Import(fresh(_ident), rng.choice(list(Layer))) for _ in range(rng.randint(0, 3)))
    terms = []
    for _ in range(rng.randint(1, 8)):
        tname = fresh(_text)
        syns = tuple(fresh(_text) for _ in range(rng.randint(0, 2)))
        origin = Origin.REUSED if rng.random() < 0.3 else Origin.OWN
        stereo = None
        if origin is Origin.REUSED or rng.random() < 0.5:
            home = rng.choice([i.name for i in imports] or ["Elsewhere"])
            stereo = TermRef(home, _text(rng))
        qual = _text(rng) if rng.random() < 0.2 else None
        terms.append(Term(tname, syns, origin, stereo, qual))
    names = [t.name for t in terms]

    links = set()
    for _ in range(rng.randint(0, 6)):
        links.add(TaxonomicLink(rng.choice(names), rng.choice(names)))
    links = sorted(links, key=lambda l: (l.child, l.parent))

    gensets = []
    for _ in range(rng.randint(0, 2)):
        kids = rng.sample(names, rng.randint(1, len(names)))
        gensets.append(GeneralizationSet(rng.choice(names), tuple(kids),
                                         rng.choice(list(Completeness)),
                                         rng.choice(list(Disjointness))))

    rels = []
    sigs = set()
    for _ in range(rng.randint(0, 6)):
        rname = rng.choice([r.name for r in rels] + [_text(rng)]) if rels else _text(rng)
        src = TermRef(name, rng.choice(names))
        if rng.random() < 0.2:
            src = TermRef(rng.choice([i.name for i in imports] or ["Elsewhere"]), _text(rng))
        tgt = TermRef(name, rng.choice(names))
        if (rname, src, tgt) in sigs:
            continue
        sigs.add((rname, src, tgt))
        rels.append(RelationshipDef(
            rname, src, tgt, _mult(rng), _mult(rng),
            _text(rng) if rng.random() < 0.3 else "",
            _text(rng) if rng.random() < 0.2 else None,
            _text(rng) if rng.random() < 0.2 else None,
        ))
    rel_names = list(dict.fromkeys(r.name for r in rels))

    aliases = []
    if rel_names:
        for a in {_ident(rng) for _ in range(rng.randint(0, 2))}:
            aliases.append((a, rng.choice(rel_names)))

    axioms = []
    if rel_names:
        for i in range(rng.randint(0, 3)):
            vs = list(dict.fromkeys(_ident(rng) for _ in range(rng.randint(1, 3))))
            universals = tuple((v, TermRef(name, rng.choice(names))) for v in vs)

            def atom(scope):
                return RelationAtom(rng.choice(rel_names), rng.choice(scope), rng.choice(scope))

            body = tuple(atom(vs) for _ in range(rng.randint(1, 3)))
            kind = rng.randrange(3)
            if kind == 0:
                head = atom(vs)
            elif kind == 1:
                head = NegatedAtom(atom(vs))
            else:
                w = "w_" + _ident(rng)
                head = ExistentialBlock(w, TermRef(name, rng.choice(names)),
                                        tuple(atom(vs + [w]) for _ in range(rng.randint(1, 2))))
            axioms.append(AxiomRule(f"A{i}", universals, body, head))

    return Ontology(
        name, _text(rng, 0, 5) if rng.random() < 0.5 else "1.0", rng.choice(list(Layer)),
        imports, tuple(terms), tuple(links), tuple(gensets), tuple(rels), tuple(axioms),
        tuple(aliases),
    )
