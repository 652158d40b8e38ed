"""Lexer, parsers and serializers for ``.onto``, ``.inst`` and ``.refmap`` files.

All three formats share one token set: double-quoted strings (names may
contain spaces), bare identifiers, bracketed multiplicities such as
``[1..*]`` and a little punctuation. ``#`` starts a comment. Declarations
are keyword-led, so line breaks are insignificant to the grammar; they
only serve error recovery.

Parsers never raise anything but :class:`ParseError`, whose
``diagnostics`` carry a :class:`SourceSpan` each.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Union

from .axioms import AxiomRule, ExistentialBlock, NegatedAtom, RelationAtom
from .instances import InstanceLink, InstanceModel, InstanceNode
from .model import (
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
from .refinement import RefinementMap, RefinementRow

Text = Union[str, bytes]


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 0

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError("spans are 1-based")


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str
    code: str
    message: str
    span: SourceSpan

    def format(self) -> str:
        s = self.span
        return f"{s.file}:{s.line}:{s.column}: {self.severity} {self.code}: {self.message}"

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "subjects": [f"{self.span.file}:{self.span.line}:{self.span.column}"],
            "message": self.message,
        }


class ParseError(Exception):
    def __init__(self, diagnostics: Iterable[ParseDiagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(d.format() for d in self.diagnostics))


class MultiplicityError(ValueError):
    code = "MALFORMED_MULTIPLICITY"


_MULT_RE = re.compile(r"(\d+)(?:\.\.(\d+|\*))?|\*")


def parse_multiplicity(token: str) -> Multiplicity:
    """``"N"``, ``"*"``, ``"N..M"`` or ``"N..*"`` to a :class:`Multiplicity`."""
    tok = token.strip()
    m = _MULT_RE.fullmatch(tok)
    if not m:
        raise MultiplicityError(f"malformed multiplicity {token!r}")
    if tok == "*":
        return Multiplicity(0, None)
    lo = int(m.group(1))
    hi_s = m.group(2)
    hi = lo if hi_s is None else (None if hi_s == "*" else int(hi_s))
    if hi is not None and (hi < lo or hi < 1):
        raise MultiplicityError(f"multiplicity {token!r} has no valid upper bound")
    return Multiplicity(lo, hi)


# ---------------------------------------------------------------- lexing

@dataclass(frozen=True)
class Token:
    kind: str  # STRING, IDENT, MULT, PUNCT, EOF
    value: str
    line: int
    col: int
    length: int
    first_on_line: bool = False


_PUNCT = ("->", ",", ":", ".", "(", ")", "{", "}", "&", "=")
_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}
_IDENT_START = re.compile(r"[A-Za-z_]")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _decode(text: Text, file: str) -> str:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            head = text[: exc.start]
            line = head.count(b"\n") + 1
            col = exc.start - (head.rfind(b"\n") + 1) + 1
            raise ParseError([ParseDiagnostic(
                "error", "ENCODING", f"invalid UTF-8 at byte {exc.start}",
                SourceSpan(file, line, col, 1))]) from None
    return text.lstrip("\ufeff").replace("\r\n", "\n")


def _lex(src: str, file: str, diags: list[ParseDiagnostic]) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(src)
    line_has_token = False

    def err(code: str, msg: str, l: int, c: int, length: int = 1) -> None:
        diags.append(ParseDiagnostic("error", code, msg, SourceSpan(file, l, c, length)))

    def emit(kind: str, value: str, l: int, c: int, length: int) -> None:
        nonlocal line_has_token
        tokens.append(Token(kind, value, l, c, length, not line_has_token))
        line_has_token = True

    while i < n:
        ch = src[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            line_has_token = False
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if ch == "#":
            while i < n and src[i] != "\n":
                i += 1
            continue
        if ch == '"':
            start_col = col
            j = i + 1
            buf = []
            ok = True
            while True:
                if j >= n or src[j] == "\n":
                    err("UNTERMINATED_STRING", "string is not closed on this line",
                        line, start_col, j - i)
                    ok = False
                    break
                c = src[j]
                if c == '"':
                    j += 1
                    break
                if c == "\\":
                    nxt = src[j + 1] if j + 1 < n else ""
                    if nxt in _ESCAPES and nxt:
                        buf.append(_ESCAPES[nxt])
                        j += 2
                        continue
                    err("BAD_ESCAPE", f"unknown escape \\{nxt}", line, col + (j - i), 2)
                    ok = False
                    j += 1
                    continue
                buf.append(c)
                j += 1
            if ok:
                emit("STRING", "".join(buf), line, start_col, j - i)
            col += j - i
            i = j
            continue
        if ch == "[":
            j = src.find("]", i)
            nl = src.find("\n", i)
            if j < 0 or (0 <= nl < j):
                err("UNTERMINATED_MULTIPLICITY", "missing ']'", line, col)
                i, col = i + 1, col + 1
                continue
            emit("MULT", src[i + 1 : j], line, col, j - i + 1)
            col += j - i + 1
            i = j + 1
            continue
        if _IDENT_START.match(ch):
            m = _IDENT.match(src, i)
            word = m.group(0)
            emit("IDENT", word, line, col, len(word))
            i, col = i + len(word), col + len(word)
            continue
        for p in _PUNCT:
            if src.startswith(p, i):
                emit("PUNCT", p, line, col, len(p))
                i, col = i + len(p), col + len(p)
                break
        else:
            err("UNEXPECTED_CHARACTER", f"unexpected character {ch!r}", line, col)
            i, col = i + 1, col + 1
    # EOF sits on the last character so that spans stay inside the text
    if tokens:
        last = tokens[-1]
        eof_line, eof_col = last.line, last.col + last.length
    else:
        eof_line, eof_col = 1, 1
    tokens.append(Token("EOF", "", eof_line, eof_col, 0, True))
    return tokens


class _Sync(Exception):
    """Abandon the current declaration and resynchronize."""


class _Parser:
    def __init__(self, text: Text, file: str, keywords: frozenset[str],
                 line_start: Optional[Callable[[list[Token], int], bool]] = None):
        self.file = file
        self.line_start = line_start
        self.diags: list[ParseDiagnostic] = []
        self.src = _decode(text, file)
        self.toks = _lex(self.src, file, self.diags)
        self.pos = 0
        self.keywords = keywords

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def span(self, tok: Optional[Token] = None) -> SourceSpan:
        t = tok or self.tok
        return SourceSpan(self.file, t.line, t.col, t.length)

    def error(self, code: str, msg: str, span: Optional[SourceSpan] = None) -> None:
        self.diags.append(ParseDiagnostic("error", code, msg, span or self.span()))

    def warn(self, code: str, msg: str, span: SourceSpan) -> None:
        self.diags.append(ParseDiagnostic("warning", code, msg, span))

    def at(self, kind: str, value: Optional[str] = None) -> bool:
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def accept(self, kind: str, value: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, value):
            t = self.tok
            self.pos += 1
            return t
        return None

    def expect(self, kind: str, value: Optional[str] = None, what: str = "") -> Token:
        t = self.accept(kind, value)
        if t is None:
            want = what or (f"'{value}'" if value else kind.lower())
            got = "end of input" if self.tok.kind == "EOF" else repr(self.tok.value)
            self.error("SYNTAX_ERROR", f"expected {want}, found {got}")
            raise _Sync
        return t

    def name(self, what: str = "name") -> Token:
        return self.expect("STRING", what=f"quoted {what}")

    def name_or_ident(self, what: str) -> Token:
        t = self.accept("STRING") or self.accept("IDENT")
        if t is None:
            self.expect("STRING", what=what)
        return t

    def recover(self, start: int) -> None:
        """Skip to the next token that can begin a declaration on a fresh line."""
        if self.pos == start:
            self.pos += 1
        while self.tok.kind != "EOF":
            t = self.tok
            if t.first_on_line and (
                (t.kind == "IDENT" and t.value in self.keywords)
                or (self.line_start is not None and self.line_start(self.toks, self.pos))
            ):
                return
            self.pos += 1

    def finish(self):
        errors = [d for d in self.diags if d.severity == "error"]
        if errors:
            raise ParseError(sorted(self.diags, key=lambda d: (d.span.line, d.span.column)))


# ------------------------------------------------------------- ontologies

_ONTO_KEYWORDS = frozenset(
    {"ontology", "import", "term", "isa", "genset", "rel", "alias", "axiom"})


@dataclass
class _RawBlock:
    name: str
    version: str
    layer: Layer
    span: SourceSpan
    imports: list = field(default_factory=list)
    terms: list = field(default_factory=list)
    isas: list = field(default_factory=list)
    gensets: list = field(default_factory=list)
    rels: list = field(default_factory=list)
    aliases: list = field(default_factory=list)
    axioms: list = field(default_factory=list)


def _enum(p: _Parser, enum, tok: Token, what: str):
    try:
        return enum(tok.value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum)
        p.error("SYNTAX_ERROR", f"unknown {what} {tok.value!r} (expected one of {allowed})",
                p.span(tok))
        raise _Sync from None


def _qref(p: _Parser) -> tuple[Optional[str], Token]:
    first = p.name("term name")
    if p.at("PUNCT", ".") and p.peek().kind == "STRING":
        p.pos += 1
        return first.value, p.name("term name")
    return None, first


def _atoms(p: _Parser) -> list:
    out = [_atom(p)]
    while p.accept("PUNCT", "&"):
        out.append(_atom(p))
    return out


def _atom(p: _Parser):
    rel = p.accept("STRING") or p.accept("IDENT")
    if rel is None:
        p.expect("STRING", what="relationship name")
    p.expect("PUNCT", "(")
    a = p.expect("IDENT", what="variable")
    p.expect("PUNCT", ",")
    b = p.expect("IDENT", what="variable")
    p.expect("PUNCT", ")")
    return (rel, a, b)


def _vdecl(p: _Parser):
    v = p.expect("IDENT", what="variable")
    p.expect("PUNCT", ":")
    onto, term = _qref(p)
    return (v, onto, term)


def _parse_onto_decl(p: _Parser, blk: _RawBlock) -> None:
    kw = p.expect("IDENT", what="declaration")
    k = kw.value
    if k == "import":
        name = p.name_or_ident("ontology name")
        p.expect("IDENT", "layer")
        layer = _enum(p, Layer, p.expect("IDENT", what="layer"), "layer")
        blk.imports.append((name, layer))
    elif k == "term":
        name = p.name("term name")
        synonyms = []
        origin = Origin.OWN
        stereo = None
        qualifier = None
        if p.accept("IDENT", "synonyms"):
            synonyms.append(p.name("synonym"))
            while p.accept("PUNCT", ","):
                synonyms.append(p.name("synonym"))
        if p.at("IDENT", "reused") or p.at("IDENT", "own"):
            origin = Origin(p.tok.value)
            p.pos += 1
        if p.accept("IDENT", "stereotype"):
            stereo = _qref(p)
        if p.accept("IDENT", "qualifier"):
            qualifier = p.name("qualifier").value
        blk.terms.append((name, synonyms, origin, stereo, qualifier))
    elif k == "isa":
        child = p.name("term name")
        p.expect("IDENT", "of")
        parent = p.name("term name")
        blk.isas.append((child, parent))
    elif k == "genset":
        parent = p.name("term name")
        p.expect("PUNCT", "{")
        children = [p.name("term name")]
        while p.accept("PUNCT", ","):
            children.append(p.name("term name"))
        p.expect("PUNCT", "}")
        comp = _enum(p, Completeness, p.expect("IDENT", what="completeness"), "completeness")
        disj = _enum(p, Disjointness, p.expect("IDENT", what="disjointness"), "disjointness")
        blk.gensets.append((parent, children, comp, disj, kw))
    elif k == "rel":
        name = p.name("relationship name")
        p.expect("IDENT", "from")
        src = _endpoint(p)
        p.expect("IDENT", "to")
        tgt = _endpoint(p)
        definition = ""
        if p.accept("IDENT", "def"):
            definition = p.name("definition").value
        blk.rels.append((name, src, tgt, definition))
    elif k == "alias":
        alias = p.expect("IDENT", what="alias")
        p.expect("PUNCT", "=")
        blk.aliases.append((alias, p.name("relationship name")))
    elif k == "axiom":
        ident = p.expect("IDENT", what="axiom id")
        p.expect("IDENT", "forall")
        universals = [_vdecl(p)]
        while p.accept("PUNCT", ","):
            universals.append(_vdecl(p))
        p.expect("PUNCT", ":")
        body = _atoms(p)
        p.expect("PUNCT", "->")
        if p.at("IDENT", "not") and p.peek().kind in ("STRING", "IDENT"):
            p.pos += 1
            head = ("not", _atom(p))
        elif p.at("IDENT", "exists") and p.peek().kind == "IDENT" and p.peek(2).value == ":":
            p.pos += 1
            var = _vdecl(p)
            p.expect("PUNCT", ":")
            head = ("exists", var, _atoms(p))
        else:
            head = ("atom", _atom(p))
        blk.axioms.append((ident, universals, body, head))
    else:
        p.error("SYNTAX_ERROR", f"unknown declaration {k!r}", p.span(kw))
        raise _Sync


def _endpoint(p: _Parser):
    qualifier = None
    if p.accept("PUNCT", "("):
        qualifier = p.name("qualifier").value
        p.expect("PUNCT", ")")
    onto, term = _qref(p)
    mult_tok = p.expect("MULT", what="multiplicity like [1..*]")
    try:
        mult = parse_multiplicity(mult_tok.value)
    except MultiplicityError as exc:
        p.error(MultiplicityError.code, str(exc), p.span(mult_tok))
        mult = Multiplicity(0)
    return (qualifier, onto, term, mult)


def _build_block(p: _Parser, blk: _RawBlock) -> Ontology:
    spans: dict = {("ontology", blk.name): blk.span}
    lookup: dict[str, str] = {}
    terms: list[Term] = []

    def local(tok: Token) -> Optional[str]:
        hit = lookup.get(tok.value)
        if hit is None:
            p.error("UNRESOLVED_TERM", f'"{tok.value}" is not a term of {blk.name}', p.span(tok))
        return hit

    def ref(onto: Optional[str], tok: Token) -> Optional[TermRef]:
        if onto is None or onto == blk.name:
            name = local(tok)
            return TermRef(blk.name, name) if name else None
        return TermRef(onto, tok.value)

    imports = []
    seen_imports = set()
    for name_tok, layer in blk.imports:
        if name_tok.value in seen_imports:
            p.error("DUPLICATE_IMPORT", f"{name_tok.value} imported twice", p.span(name_tok))
            continue
        seen_imports.add(name_tok.value)
        imports.append(Import(name_tok.value, layer))

    # names first, so references may point forward
    for name_tok, synonyms, *_ in blk.terms:
        for tok in [name_tok, *synonyms]:
            if not tok.value.strip():
                p.error("EMPTY_NAME", "term names must not be blank", p.span(tok))
            elif tok.value in lookup:
                p.error("DUPLICATE_TERM", f'"{tok.value}" is already declared in {blk.name}',
                        p.span(tok))
            else:
                lookup[tok.value] = name_tok.value

    for name_tok, synonyms, origin, stereo, qualifier in blk.terms:
        st = ref(*stereo) if stereo else None
        if origin is Origin.REUSED and stereo is None:
            p.error("MISSING_STEREOTYPE",
                    f'reused term "{name_tok.value}" must name its source term', p.span(name_tok))
        terms.append(Term(name_tok.value, tuple(s.value for s in synonyms), origin, st, qualifier))
        spans.setdefault(("term", name_tok.value), p.span(name_tok))

    links = []
    for child_tok, parent_tok in blk.isas:
        c, par = local(child_tok), local(parent_tok)
        if c and par:
            link = TaxonomicLink(c, par)
            if link in links:
                p.error("DUPLICATE_ISA", f'"{c}" is already declared under "{par}"',
                        p.span(child_tok))
            else:
                links.append(link)
                spans[("isa", c, par)] = p.span(child_tok)

    gensets = []
    for parent_tok, child_toks, comp, disj, kw in blk.gensets:
        parent = local(parent_tok)
        children = [local(t) for t in child_toks]
        if len(set(children)) != len(children):
            p.error("DUPLICATE_CHILD", "generalization set lists a child twice", p.span(kw))
            continue
        if parent and all(children):
            gensets.append(GeneralizationSet(parent, tuple(children), comp, disj))
            spans[("genset", parent, tuple(children))] = p.span(kw)

    rels = []
    sigs = set()
    for name_tok, src, tgt, definition in blk.rels:
        if not name_tok.value.strip():
            p.error("EMPTY_NAME", "relationship names must not be blank", p.span(name_tok))
            continue
        (sq, so, st_tok, smult), (tq, to, tt_tok, tmult) = src, tgt
        s_ref, t_ref = ref(so, st_tok), ref(to, tt_tok)
        if s_ref is None or t_ref is None:
            continue
        sig = (name_tok.value, s_ref, t_ref)
        if sig in sigs:
            p.error("DUPLICATE_RELATIONSHIP",
                    f'relationship "{name_tok.value}" between these terms is already declared',
                    p.span(name_tok))
            continue
        sigs.add(sig)
        rels.append(RelationshipDef(name_tok.value, s_ref, t_ref, smult, tmult, definition, sq, tq))
        spans.setdefault(("rel", name_tok.value), p.span(name_tok))
    rel_names = {r.name for r in rels}

    aliases = []
    alias_map: dict[str, str] = {}
    for alias_tok, target_tok in blk.aliases:
        if alias_tok.value in alias_map:
            p.error("DUPLICATE_ALIAS", f"alias {alias_tok.value} declared twice", p.span(alias_tok))
            continue
        if target_tok.value not in rel_names:
            p.error("UNRESOLVED_RELATIONSHIP",
                    f'"{target_tok.value}" is not a relationship of {blk.name}', p.span(target_tok))
            continue
        alias_map[alias_tok.value] = target_tok.value
        aliases.append((alias_tok.value, target_tok.value))

    axioms = []
    axiom_ids = set()
    for ident, universals, body, head in blk.axioms:
        if ident.value in axiom_ids:
            p.error("DUPLICATE_AXIOM", f"axiom {ident.value} declared twice", p.span(ident))
            continue
        axiom_ids.add(ident.value)
        ok = True
        scope: dict[str, Token] = {}

        def declare(v: Token, onto, term_tok) -> Optional[tuple[str, TermRef]]:
            nonlocal ok
            if v.value in scope:
                p.error("DUPLICATE_VARIABLE", f"variable {v.value} declared twice", p.span(v))
                ok = False
                return None
            scope[v.value] = v
            r = ref(onto, term_tok)
            if r is None:
                ok = False
                return None
            return (v.value, r)

        def atom(raw) -> Optional[RelationAtom]:
            nonlocal ok
            rel_tok, a, b = raw
            name = rel_tok.value if rel_tok.kind == "STRING" else alias_map.get(rel_tok.value)
            if name is None or name not in rel_names:
                p.error("UNRESOLVED_RELATIONSHIP",
                        f"{rel_tok.value!r} is not a relationship or alias of {blk.name}",
                        p.span(rel_tok))
                ok = False
                return None
            for v in (a, b):
                if v.value not in scope:
                    p.error("UNDECLARED_VARIABLE", f"variable {v.value} is not quantified",
                            p.span(v))
                    ok = False
            return RelationAtom(name, a.value, b.value)

        us = [declare(*u) for u in universals]
        body_atoms = [atom(a) for a in body]
        if head[0] == "exists":
            ex = declare(*head[1])
            inner = [atom(a) for a in head[2]]
            h = ExistentialBlock(ex[0], ex[1], tuple(inner)) if ok and ex else None
        elif head[0] == "not":
            inner = atom(head[1])
            h = NegatedAtom(inner) if inner else None
        else:
            h = atom(head[1])
        if ok and h is not None:
            axioms.append(AxiomRule(ident.value, tuple(us), tuple(body_atoms), h))
            spans[("axiom", ident.value)] = p.span(ident)

    return Ontology(
        name=blk.name, version=blk.version, layer=blk.layer, imports=tuple(imports),
        terms=tuple(terms), taxonomic_links=tuple(links), generalization_sets=tuple(gensets),
        relationships=tuple(rels), axioms=tuple(axioms), aliases=tuple(aliases), spans=spans,
    )


def parse_ontologies(text: Text, file: str = "<input>") -> list[Ontology]:
    """Parse every ``ontology`` block in a file.

    The first block is the file's principal ontology; later blocks usually
    stand in for the imported ontologies it reuses terms from.
    """
    p = _Parser(text, file, _ONTO_KEYWORDS)
    blocks: list[_RawBlock] = []
    if p.at("EOF") and not p.diags:
        p.error("SYNTAX_ERROR", "expected 'ontology' header")
    while not p.at("EOF"):
        start = p.pos
        try:
            if p.at("IDENT", "ontology"):
                kw = p.tok
                p.pos += 1
                name = p.name_or_ident("ontology name")
                p.expect("IDENT", "version")
                version = p.name("version").value
                p.expect("IDENT", "layer")
                layer = _enum(p, Layer, p.expect("IDENT", what="layer"), "layer")
                blocks.append(_RawBlock(name.value, version, layer, p.span(kw)))
            elif not blocks:
                p.error("SYNTAX_ERROR", "expected 'ontology' header")
                raise _Sync
            else:
                _parse_onto_decl(p, blocks[-1])
        except _Sync:
            p.recover(start)
    names = set()
    out = []
    for blk in blocks:
        if blk.name in names:
            p.error("DUPLICATE_ONTOLOGY", f"ontology {blk.name} declared twice", blk.span)
        names.add(blk.name)
        out.append(_build_block(p, blk))
    p.finish()
    return out


def parse_ontology(text: Text, file: str = "<input>") -> Ontology:
    """Parse a file and return its principal (first) ontology."""
    return parse_ontologies(text, file)[0]


# -------------------------------------------------------- instance models

def _node_decl_start(toks: list[Token], i: int) -> bool:
    return toks[i].kind == "IDENT" and i + 1 < len(toks) and toks[i + 1].value == ":"


def parse_instance_model(text: Text, file: str = "<input>") -> InstanceModel:
    p = _Parser(text, file, frozenset({"model", "link"}), _node_decl_start)
    header = None
    nodes: dict[str, tuple[Token, list[str]]] = {}
    links: list[tuple[Token, Token, Token]] = []

    if p.at("EOF") and not p.diags:
        p.error("SYNTAX_ERROR", "expected 'model' header")
    while not p.at("EOF"):
        start = p.pos
        try:
            if header is None:
                p.expect("IDENT", "model", what="'model' header")
                name = p.expect("IDENT", what="model name")
                p.expect("IDENT", "conforms")
                onto = p.name_or_ident("ontology name")
                header = (name.value, onto.value)
            elif p.at("IDENT", "link") and p.peek().kind == "STRING":
                p.pos += 1
                rel = p.name("relationship name")
                src = p.expect("IDENT", what="node id")
                p.expect("PUNCT", "->")
                tgt = p.expect("IDENT", what="node id")
                links.append((rel, src, tgt))
            else:
                nid = p.expect("IDENT", what="node id or 'link'")
                p.expect("PUNCT", ":")
                terms = [p.name("term name").value]
                while p.accept("PUNCT", ","):
                    terms.append(p.name("term name").value)
                if nid.value in nodes:
                    p.error("DUPLICATE_NODE", f"node {nid.value} declared twice", p.span(nid))
                else:
                    nodes[nid.value] = (nid, terms)
        except _Sync:
            p.recover(start)

    built = []
    for rel, src, tgt in links:
        for end in (src, tgt):
            if end.value not in nodes:
                p.error("UNDECLARED_NODE", f"node {end.value} is never declared", p.span(end))
        link = InstanceLink(rel.value, src.value, tgt.value)
        if link in built:
            p.warn("DUPLICATE_LINK", "link repeated; duplicates collapse", p.span(rel))
        else:
            built.append(link)
    p.finish()
    warnings = tuple(d for d in p.diags if d.severity == "warning")
    return InstanceModel(
        header[0], header[1],
        tuple(InstanceNode(nid, tuple(ts)) for nid, (_, ts) in nodes.items()),
        tuple(built), warnings,
    )


# -------------------------------------------------------- refinement maps

def parse_refinement_map(text: Text, file: str = "<input>") -> RefinementMap:
    p = _Parser(text, file, frozenset({"refine"}), lambda toks, i: toks[i].kind == "STRING")
    header = None
    rows: list[RefinementRow] = []
    seen: set[str] = set()
    if p.at("EOF") and not p.diags:
        p.error("SYNTAX_ERROR", "expected 'refine' header")
    while not p.at("EOF"):
        start = p.pos
        try:
            if header is None:
                p.expect("IDENT", "refine", what="'refine' header")
                lower = p.name_or_ident("ontology name")
                p.expect("IDENT", "onto")
                upper = p.name_or_ident("ontology name")
                header = (lower.value, upper.value)
                continue
            lower_tok = p.name("relationship name")
            p.expect("PUNCT", "->")
            parts = [p.name("relationship name")]
            while p.at("STRING") and not (p.peek().kind == "PUNCT" and p.peek().value == "->"):
                parts.append(p.name())
            if len(parts) == 1:
                row = RefinementRow(lower_tok.value, parts[0].value)
            elif len(parts) == 3:
                row = RefinementRow(lower_tok.value, parts[1].value, parts[0].value, parts[2].value)
            else:
                p.error("SYNTAX_ERROR",
                        'expected "upper rel" or "Term 1" "upper rel" "Term 2"', p.span(parts[0]))
                continue
            if row.lower in seen:
                p.error("DUPLICATE_MAPPING", f'"{row.lower}" is already mapped', p.span(lower_tok))
                continue
            seen.add(row.lower)
            rows.append(row)
        except _Sync:
            p.recover(start)
    p.finish()
    return RefinementMap(header[0], header[1], tuple(rows))


# ----------------------------------------------------------- serializers

def quote(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"')
    return '"' + out.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r") + '"'


def _ident_or_quote(s: str) -> str:
    return s if _IDENT.fullmatch(s) else quote(s)


def _ref(r: TermRef, home: str) -> str:
    return quote(r.name) if r.ontology == home else f"{quote(r.ontology)}.{quote(r.name)}"


def _atom_text(a: RelationAtom) -> str:
    return f"{quote(a.relationship)}({a.left}, {a.right})"


def serialize_ontology(ontology: Union[Ontology, Iterable[Ontology]]) -> str:
    blocks = [ontology] if isinstance(ontology, Ontology) else list(ontology)
    return "\n".join(_serialize_block(o) for o in blocks)


def _serialize_block(o: Ontology) -> str:
    home = o.name
    lines = [f"ontology {_ident_or_quote(o.name)} version {quote(o.version)} layer {o.layer.value}"]
    lines += [f"import {_ident_or_quote(i.name)} layer {i.layer.value}" for i in o.imports]
    for t in o.terms:
        parts = [f"term {quote(t.name)}"]
        if t.synonyms:
            parts.append("synonyms " + ", ".join(quote(s) for s in t.synonyms))
        if t.origin is Origin.REUSED:
            parts.append("reused")
        if t.stereotype is not None:
            parts.append("stereotype " + _ref(t.stereotype, home))
        if t.qualifier is not None:
            parts.append("qualifier " + quote(t.qualifier))
        lines.append(" ".join(parts))
    lines += [f"isa {quote(l.child)} of {quote(l.parent)}" for l in o.taxonomic_links]
    for g in o.generalization_sets:
        kids = ", ".join(quote(c) for c in g.children)
        lines.append(f"genset {quote(g.parent)} {{ {kids} }} "
                     f"{g.completeness.value} {g.disjointness.value}")
    for r in o.relationships:
        def end(ref, q, m):
            pre = f"({quote(q)}) " if q is not None else ""
            return f"{pre}{_ref(ref, home)}[{m}]"
        line = (f"rel {quote(r.name)} from {end(r.source, r.source_qualifier, r.source_mult)} "
                f"to {end(r.target, r.target_qualifier, r.target_mult)}")
        if r.definition:
            line += f" def {quote(r.definition)}"
        lines.append(line)
    lines += [f"alias {a} = {quote(t)}" for a, t in o.aliases]
    for ax in o.axioms:
        us = ", ".join(f"{v}:{_ref(g, home)}" for v, g in ax.universals)
        body = " & ".join(_atom_text(a) for a in ax.body)
        h = ax.head
        if isinstance(h, NegatedAtom):
            head = "not " + _atom_text(h.atom)
        elif isinstance(h, ExistentialBlock):
            inner = " & ".join(_atom_text(a) for a in h.atoms)
            head = f"exists {h.variable}:{_ref(h.guard, home)} : {inner}"
        else:
            head = _atom_text(h)
        lines.append(f"axiom {ax.id} forall {us} : {body} -> {head}")
    return "\n".join(lines) + "\n"


def serialize_instance_model(model: InstanceModel) -> str:
    lines = [f"model {model.name} conforms {_ident_or_quote(model.conforms_to)}"]
    lines += [f"{n.id} : " + ", ".join(quote(t) for t in n.asserted_terms) for n in model.nodes]
    lines += [f"link {quote(l.relationship)} {l.source} -> {l.target}" for l in model.links]
    return "\n".join(lines) + "\n"


def serialize_refinement_map(rmap: RefinementMap) -> str:
    lines = [f"refine {_ident_or_quote(rmap.lower)} onto {_ident_or_quote(rmap.upper)}"]
    for row in rmap.rows:
        if row.upper_source is not None:
            up = f"{quote(row.upper_source)} {quote(row.upper)} {quote(row.upper_target)}"
        else:
            up = quote(row.upper)
        lines.append(f"{quote(row.lower)} -> {up}")
    return "\n".join(lines) + "\n"


def read_text(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()

