"""The ``.ral`` specification language: lexer, parser, serializer, resolver.

A document is a sequence of declarations::

    lattice Q = {0, 1/2, 1};
    signature S = gmet(Q);
    operations P { op m/2 : product; }
    axioms A = preset gmet(Q, Refl, Sym, Tri, Pos);
    theory A;
    structure M : S close A { elements a, b; =:1/2 { (a, b) } }
    algebra Alg over M with P { m { (a, a) -> a  (a, b) -> a  (b, a) -> a  (b, b) -> b } }
    map e : M -> M { a -> a, b -> b }
    equation comm { |- m(x, y) = m(y, x) }
    check satisfies Alg comm;

Parsing is purely syntactic; :func:`resolve` turns a document into library
objects and reports unknown names, arity mismatches and invalid values as
located diagnostics.  :func:`serialize` emits the canonical text, and
``parse(serialize(doc))`` reproduces ``doc``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

from .algebras import Algebra
from .equations import ClusteredEquation, EquationError, RelAtomOnTerms, TermEquality
from .free_terms import App, Term, Var
from .horn import (
    GMET_FLAGS,
    Atom,
    AxiomSet,
    Equality,
    HornClause,
    gmet_preset,
    horn_closure,
    lvalued_preset,
    partial_algebra_preset,
    poset_preset,
)
from .liftings import Lifting, LiftingError
from .signatures import (
    AlgebraicSignature,
    LiftedSignature,
    QuantityLattice,
    RelationalSignature,
    make_gmet_signature,
    make_partial_algebra_signature,
    make_poset_signature,
)
from .structures import Structure, StructureMap

# ------------------------------------------------------------------ lexing

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<qrel>=:[0-9]+(?:/[0-9]+)?)
  | (?P<turnstile>\|-)
  | (?P<arrow>->)
  | (?P<number>[0-9]+(?:/[0-9]+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}(),;.=:/])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str
    phase: str = "syntax"

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.phase} error: {self.message}"


class DslError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(map(str, diagnostics)))


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DslError([Diagnostic(line, pos - line_start + 1, f"unexpected character {text[pos]!r}", "lexical")])
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# --------------------------------------------------------------------- AST

Pos = tuple[int, int]


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TApp:
    op: str
    args: tuple["TTerm", ...]


TTerm = Union[TVar, TApp]


@dataclass(frozen=True)
class LatticeDecl:
    name: str
    elements: tuple[Fraction, ...]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SignatureDecl:
    name: str
    symbols: tuple[tuple[str, int], ...] = ()
    preset: str | None = None
    arg: str | None = None
    pos: Pos = field(default=(0, 0), compare=False)
    where: tuple[Pos, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class OperationsDecl:
    name: str
    ops: tuple[tuple[str, int, Lifting], ...]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class AxiomsDecl:
    name: str
    over: str | None = None
    clauses: tuple[HornClause, ...] = ()
    preset: str | None = None
    args: tuple[str, ...] = ()
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class StructureDecl:
    name: str
    sig: str
    close: str | None
    elements: tuple[str, ...]
    rels: tuple[tuple[str, tuple[tuple[str, ...], ...]], ...]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class AlgebraDecl:
    name: str
    carrier: str
    ops: str
    tables: tuple[tuple[str, tuple[tuple[tuple[str, ...], str], ...]], ...]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class MapDecl:
    name: str
    dom: str
    cod: str
    pairs: tuple[tuple[str, str], ...]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class EquationDecl:
    name: str
    c: int | None
    premises: tuple[Atom, ...]
    conclusion: tuple  # ("eq", TTerm, TTerm) or ("rel", name, (TTerm, ...))
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class TheoryDecl:
    name: str
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class CheckDecl:
    kind: str
    args: tuple[str, ...]
    c: int | None = None
    pos: Pos = field(default=(0, 0), compare=False)


Decl = Union[
    LatticeDecl, SignatureDecl, OperationsDecl, AxiomsDecl, StructureDecl, AlgebraDecl, MapDecl,
    EquationDecl, TheoryDecl, CheckDecl,
]

CHECK_KINDS = ("in_C", "valid", "satisfies", "fails", "exactness", "reflexive", "not_reflexive")


@dataclass(frozen=True)
class Document:
    decls: tuple[Decl, ...] = ()


# ------------------------------------------------------------------ parser


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None) -> DslError:
        t = tok or self.tok
        return DslError([Diagnostic(t.line, t.col, message)])

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("punct", "ident", "arrow", "turnstile")

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "ident":
            raise self.error(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        return self.advance().text

    def relname(self) -> str:
        if self.tok.kind in ("ident", "qrel"):
            return self.advance().text
        raise self.error(f"expected a relation symbol, found {self.tok.text or 'end of input'!r}")

    def number(self) -> Fraction:
        t = self.tok
        if t.kind != "number":
            raise self.error(f"expected a number, found {t.text or 'end of input'!r}")
        self.advance()
        try:
            return Fraction(t.text)
        except ZeroDivisionError:
            raise self.error("division by zero", t) from None

    def integer(self) -> int:
        t = self.tok
        value = self.number()
        if value.denominator != 1:
            raise self.error("expected an integer", t)
        return int(value)

    def comma_list(self, item, close: str) -> list:
        out = []
        if self.at(close):
            return out
        out.append(item())
        while self.at(","):
            self.advance()
            out.append(item())
        return out

    # -- document
    def document(self) -> Document:
        decls = []
        while self.tok.kind != "eof":
            decls.append(self.decl())
        return Document(tuple(decls))

    def decl(self) -> Decl:
        t = self.tok
        handler = {
            "lattice": self.lattice,
            "signature": self.signature,
            "operations": self.operations,
            "axioms": self.axioms,
            "structure": self.structure,
            "algebra": self.algebra,
            "map": self.map_decl,
            "equation": self.equation,
            "theory": self.theory,
            "check": self.check,
        }.get(t.text if t.kind == "ident" else "")
        if handler is None:
            raise self.error(f"expected a declaration, found {t.text or 'end of input'!r}")
        self.advance()
        return handler((t.line, t.col))

    def lattice(self, pos: Pos) -> LatticeDecl:
        name = self.ident("lattice name")
        self.expect("=")
        self.expect("{")
        elements = self.comma_list(self.number, "}")
        self.expect("}")
        self.expect(";")
        return LatticeDecl(name, tuple(elements), pos)

    def signature(self, pos: Pos) -> SignatureDecl:
        name = self.ident("signature name")
        if self.at("="):
            self.advance()
            t = self.tok
            preset = self.ident("signature preset")
            arg = None
            if preset in ("gmet", "partial"):
                self.expect("(")
                arg = self.ident()
                self.expect(")")
            elif preset != "poset":
                raise self.error(f"unknown signature preset {preset!r}", t)
            self.expect(";")
            return SignatureDecl(name, (), preset, arg, pos)
        self.expect("{")
        symbols, where = [], []
        while self.at("rel"):
            self.advance()
            t = self.tok
            rel = self.relname()
            self.slash()
            symbols.append((rel, self.integer()))
            where.append((t.line, t.col))
            self.expect(";")
        self.expect("}")
        return SignatureDecl(name, tuple(symbols), None, None, pos, tuple(where))

    def slash(self) -> None:
        if self.tok.kind == "punct" and self.tok.text == "/":
            self.advance()
            return
        raise self.error(f"expected '/', found {self.tok.text or 'end of input'!r}")

    def operations(self, pos: Pos) -> OperationsDecl:
        name = self.ident("operations name")
        self.expect("{")
        ops = []
        while self.at("op"):
            self.advance()
            op = self.ident("operation name")
            self.slash()
            arity = self.integer()
            self.expect(":")
            t = self.tok
            try:
                lifting = self.lifting()
            except (LiftingError, ValueError) as exc:
                if isinstance(exc, DslError):
                    raise
                raise self.error(str(exc), t) from None
            ops.append((op, arity, lifting))
            self.expect(";")
        self.expect("}")
        return OperationsDecl(name, tuple(ops), pos)

    def lifting(self) -> Lifting:
        t = self.tok
        kind = self.ident("lifting kind")
        if kind in ("discrete", "product"):
            return Lifting(kind)
        if kind == "subset":
            self.expect("{")
            coords = self.comma_list(self.integer, "}")
            self.expect("}")
            return Lifting("subset", coords=frozenset(coords))
        if kind == "lex":
            self.expect("(")
            order = self.relname()
            self.expect(")")
            return Lifting("lex", order=order)
        if kind in ("lipschitz", "lk"):
            self.expect("(")
            value = self.number()
            self.expect(")")
            return Lifting("lipschitz", alpha=value) if kind == "lipschitz" else Lifting("lk", p=value)
        raise self.error(f"unknown lifting {kind!r}", t)

    def axioms(self, pos: Pos) -> AxiomsDecl:
        name = self.ident("axioms name")
        if self.at("="):
            self.advance()
            self.expect("preset")
            t = self.tok
            preset = self.ident("preset name")
            args: list[str] = []
            if self.at("("):
                self.advance()
                args = self.comma_list(self.ident, ")")
                self.expect(")")
            if preset not in ("gmet", "poset", "lvalued", "partial"):
                raise self.error(f"unknown axiom preset {preset!r}", t)
            self.expect(";")
            return AxiomsDecl(name, None, (), preset, tuple(args), pos)
        self.expect("over")
        over = self.ident("signature name")
        self.expect("{")
        clauses = []
        while not self.at("}"):
            clauses.append(self.clause(f"{name}[{len(clauses)}]"))
        self.expect("}")
        return AxiomsDecl(name, over, tuple(clauses), None, (), pos)

    def atom(self) -> Atom:
        rel = self.relname()
        self.expect("(")
        xs = self.comma_list(self.ident, ")")
        self.expect(")")
        return Atom(rel, tuple(xs))

    def clause(self, label: str) -> HornClause:
        premises = [] if self.at("|-") else self.comma_list(self.atom, "|-")
        self.expect("|-")
        if self.tok.kind == "ident" and self.tokens[self.i + 1].text == "=":
            left = self.ident()
            self.expect("=")
            conclusion: Union[Atom, Equality] = Equality(left, self.ident())
        else:
            conclusion = self.atom()
        self.expect(".")
        return HornClause(tuple(premises), conclusion, label=label)

    def structure(self, pos: Pos) -> StructureDecl:
        name = self.ident("structure name")
        self.expect(":")
        sig = self.ident("signature name")
        close = None
        if self.at("close"):
            self.advance()
            close = self.ident("axioms name")
        self.expect("{")
        self.expect("elements")
        elements = self.comma_list(self.ident, ";")
        self.expect(";")
        rels = []
        while not self.at("}"):
            rel = self.relname()
            self.expect("{")
            tuples = []
            while self.at("("):
                tuples.append(self.name_tuple())
            self.expect("}")
            rels.append((rel, tuple(tuples)))
        self.expect("}")
        return StructureDecl(name, sig, close, tuple(elements), tuple(rels), pos)

    def name_tuple(self) -> tuple[str, ...]:
        self.expect("(")
        xs = self.comma_list(self.ident, ")")
        self.expect(")")
        return tuple(xs)

    def algebra(self, pos: Pos) -> AlgebraDecl:
        name = self.ident("algebra name")
        self.expect("over")
        carrier = self.ident("structure name")
        self.expect("with")
        ops = self.ident("operations name")
        self.expect("{")
        tables = []
        while not self.at("}"):
            op = self.ident("operation name")
            self.expect("{")
            entries = []
            while self.at("("):
                args = self.name_tuple()
                self.expect("->")
                entries.append((args, self.ident("element name")))
            self.expect("}")
            tables.append((op, tuple(entries)))
        self.expect("}")
        return AlgebraDecl(name, carrier, ops, tuple(tables), pos)

    def map_decl(self, pos: Pos) -> MapDecl:
        name = self.ident("map name")
        self.expect(":")
        dom = self.ident("structure name")
        self.expect("->")
        cod = self.ident("structure name")
        self.expect("{")

        def pair() -> tuple[str, str]:
            x = self.ident("element name")
            self.expect("->")
            return x, self.ident("element name")

        pairs = self.comma_list(pair, "}")
        self.expect("}")
        return MapDecl(name, dom, cod, tuple(pairs), pos)

    def cluster_bound(self) -> int | None:
        self.expect("c")
        self.expect("=")
        if self.at("inf"):
            self.advance()
            return None
        return self.integer()

    def term(self) -> TTerm:
        name = self.ident("term")
        if not self.at("("):
            return TVar(name)
        self.advance()
        args = self.comma_list(self.term, ")")
        self.expect(")")
        return TApp(name, tuple(args))

    def equation(self, pos: Pos) -> EquationDecl:
        name = self.ident("equation name")
        c = self.cluster_bound() if self.at("c") else None
        self.expect("{")
        premises = [] if self.at("|-") else self.comma_list(self.atom, "|-")
        self.expect("|-")
        if self.tok.kind == "qrel":
            rel = self.advance().text
            self.expect("(")
            terms = self.comma_list(self.term, ")")
            self.expect(")")
            conclusion: tuple = ("rel", rel, tuple(terms))
        else:
            t = self.tok
            left = self.term()
            if self.at("="):
                self.advance()
                conclusion = ("eq", left, self.term())
            elif isinstance(left, TApp):
                conclusion = ("rel", left.op, left.args)
            else:
                raise self.error("expected '=' or a relational conclusion", t)
        self.expect("}")
        return EquationDecl(name, c, tuple(premises), conclusion, pos)

    def theory(self, pos: Pos) -> TheoryDecl:
        name = self.ident("axioms name")
        self.expect(";")
        return TheoryDecl(name, pos)

    def check(self, pos: Pos) -> CheckDecl:
        t = self.tok
        kind = self.ident("check kind")
        if kind not in CHECK_KINDS:
            raise self.error(f"unknown check {kind!r}", t)
        args = []
        c = None
        while self.tok.kind == "ident":
            if self.tok.text == "c" and self.tokens[self.i + 1].text == "=":
                c = self.cluster_bound()
                continue
            args.append(self.advance().text)
        self.expect(";")
        return CheckDecl(kind, tuple(args), c, pos)


def parse(text: str) -> Document:
    """Parse ``text``; raises :class:`DslError` with a located diagnostic."""
    return _parse_guarded(text)


def try_parse(text: str) -> tuple[Document | None, list[Diagnostic]]:
    try:
        return parse(text), []
    except DslError as exc:
        return None, exc.diagnostics


def _parse_guarded(text: str) -> Document:
    try:
        return _Parser(text).document()
    except RecursionError:
        raise DslError([Diagnostic(1, 1, "input nested too deeply")]) from None


# -------------------------------------------------------------- serializer


def _frac(q: Fraction) -> str:
    return str(Fraction(q))


def _atom(a: Atom) -> str:
    return f"{a.rel}({', '.join(a.vars)})"


def format_tterm(t: TTerm) -> str:
    if isinstance(t, TVar):
        return t.name
    return f"{t.op}({', '.join(format_tterm(s) for s in t.args)})"


def _tuple(xs) -> str:
    return "(" + ", ".join(xs) + ")"


def _serialize_decl(d: Decl) -> str:
    if isinstance(d, LatticeDecl):
        return f"lattice {d.name} = {{{', '.join(map(_frac, d.elements))}}};"
    if isinstance(d, SignatureDecl):
        if d.preset is not None:
            arg = f"({d.arg})" if d.arg is not None else ""
            return f"signature {d.name} = {d.preset}{arg};"
        body = "".join(f"  rel {r}/{n};\n" for r, n in d.symbols)
        return f"signature {d.name} {{\n{body}}}"
    if isinstance(d, OperationsDecl):
        body = "".join(f"  op {o}/{n} : {lift};\n" for o, n, lift in d.ops)
        return f"operations {d.name} {{\n{body}}}"
    if isinstance(d, AxiomsDecl):
        if d.preset is not None:
            args = f"({', '.join(d.args)})" if d.args else ""
            return f"axioms {d.name} = preset {d.preset}{args};"
        lines = []
        for cl in d.clauses:
            prem = ", ".join(_atom(p) for p in cl.premises)
            c = cl.conclusion
            concl = _atom(c) if isinstance(c, Atom) else f"{c.left} = {c.right}"
            lines.append(f"  {prem + ' ' if prem else ''}|- {concl}.\n")
        return f"axioms {d.name} over {d.over} {{\n{''.join(lines)}}}"
    if isinstance(d, StructureDecl):
        close = f" close {d.close}" if d.close else ""
        lines = [f"  elements {', '.join(d.elements)};\n"]
        for rel, tuples in d.rels:
            lines.append(f"  {rel} {{ {' '.join(_tuple(t) for t in tuples)} }}\n".replace("{  }", "{ }"))
        return f"structure {d.name} : {d.sig}{close} {{\n{''.join(lines)}}}"
    if isinstance(d, AlgebraDecl):
        lines = []
        for op, entries in d.tables:
            body = " ".join(f"{_tuple(args)} -> {v}" for args, v in entries)
            lines.append(f"  {op} {{ {body} }}\n")
        return f"algebra {d.name} over {d.carrier} with {d.ops} {{\n{''.join(lines)}}}"
    if isinstance(d, MapDecl):
        body = ", ".join(f"{x} -> {y}" for x, y in d.pairs)
        return f"map {d.name} : {d.dom} -> {d.cod} {{ {body} }}"
    if isinstance(d, EquationDecl):
        c = "" if d.c is None else f" c={d.c}"
        prem = ", ".join(_atom(p) for p in d.premises)
        if d.conclusion[0] == "eq":
            concl = f"{format_tterm(d.conclusion[1])} = {format_tterm(d.conclusion[2])}"
        else:
            concl = f"{d.conclusion[1]}({', '.join(format_tterm(t) for t in d.conclusion[2])})"
        return f"equation {d.name}{c} {{ {prem + ' ' if prem else ''}|- {concl} }}"
    if isinstance(d, TheoryDecl):
        return f"theory {d.name};"
    if isinstance(d, CheckDecl):
        c = "" if d.c is None else f" c={d.c}"
        return f"check {' '.join((d.kind,) + d.args)}{c};"
    raise TypeError(f"not a declaration: {d!r}")


def serialize(doc: Document) -> str:
    """Canonical text of ``doc``: one declaration per paragraph."""
    return "\n\n".join(_serialize_decl(d) for d in doc.decls) + ("\n" if doc.decls else "")


# ---------------------------------------------------------------- resolver


@dataclass(frozen=True)
class NamedStructure:
    structure: Structure
    elements: tuple[str, ...]


@dataclass(frozen=True)
class NamedAlgebra:
    algebra: Algebra
    elements: tuple[str, ...]
    carrier: str


@dataclass
class Model:
    """A resolved document: every declaration turned into library objects."""

    document: Document
    lattices: dict[str, QuantityLattice] = field(default_factory=dict)
    signatures: dict[str, RelationalSignature] = field(default_factory=dict)
    operations: dict[str, LiftedSignature] = field(default_factory=dict)
    axioms: dict[str, AxiomSet] = field(default_factory=dict)
    structures: dict[str, NamedStructure] = field(default_factory=dict)
    algebras: dict[str, NamedAlgebra] = field(default_factory=dict)
    maps: dict[str, StructureMap] = field(default_factory=dict)
    equations: dict[str, ClusteredEquation] = field(default_factory=dict)
    theory: AxiomSet | None = None
    checks: list[CheckDecl] = field(default_factory=list)

    def elements_of(self, s: Structure) -> tuple[str, ...]:
        for ns in self.structures.values():
            if ns.structure == s:
                return ns.elements
        return tuple(str(i) for i in range(s.size))


class _ResolveError(Exception):
    def __init__(self, pos: Pos, message: str):
        self.pos, self.message = pos, message


def _lookup(table: dict, name: str, kind: str, pos: Pos):
    if name not in table:
        raise _ResolveError(pos, f"unknown {kind} {name!r}")
    return table[name]


def _to_term(t: TTerm, variables: list[str], ops: dict[str, int] | None, pos: Pos) -> Term:
    if isinstance(t, TVar):
        if t.name not in variables:
            variables.append(t.name)
        return Var(variables.index(t.name))
    if ops is not None:
        if t.op not in ops:
            raise _ResolveError(pos, f"unknown operation {t.op!r}")
        if ops[t.op] != len(t.args):
            raise _ResolveError(pos, f"{t.op} expects {ops[t.op]} arguments")
    return App(t.op, tuple(_to_term(s, variables, ops, pos) for s in t.args))


def equation_from_decl(d: EquationDecl, ops: dict[str, int] | None = None) -> ClusteredEquation:
    """Variables are numbered by first occurrence (premises, then conclusion)."""
    variables: list[str] = []
    for atom in d.premises:
        for v in atom.vars:
            if v not in variables:
                variables.append(v)
    if d.conclusion[0] == "eq":
        left = _to_term(d.conclusion[1], variables, ops, d.pos)
        right = _to_term(d.conclusion[2], variables, ops, d.pos)
        conclusion: Union[RelAtomOnTerms, TermEquality] = TermEquality(left, right)
    else:
        terms = tuple(_to_term(t, variables, ops, d.pos) for t in d.conclusion[2])
        conclusion = RelAtomOnTerms(d.conclusion[1], terms)
    try:
        return ClusteredEquation(tuple(variables), d.premises, conclusion, d.c, d.name)
    except EquationError as exc:
        raise _ResolveError(d.pos, str(exc)) from None


def _index_elements(elements: tuple[str, ...], pos: Pos, owner: str) -> dict[str, int]:
    index: dict[str, int] = {}
    for e in elements:
        if e in index:
            raise _ResolveError(pos, f"duplicate element {e!r} in {owner}")
        index[e] = len(index)
    return index


def _element(index: dict[str, int], name: str, owner: str, pos: Pos) -> int:
    if name not in index:
        raise _ResolveError(pos, f"unknown element {name!r} of {owner}")
    return index[name]


def _resolve_decl(m: Model, d: Decl) -> None:
    pos = d.pos
    if isinstance(d, LatticeDecl):
        m.lattices[d.name] = QuantityLattice(d.elements)
    elif isinstance(d, SignatureDecl):
        if d.preset == "gmet":
            m.signatures[d.name] = make_gmet_signature(_lookup(m.lattices, d.arg, "lattice", pos))
        elif d.preset == "poset":
            m.signatures[d.name] = make_poset_signature()
        elif d.preset == "partial":
            m.signatures[d.name] = make_partial_algebra_signature(
                _lookup(m.operations, d.arg, "operations block", pos).base
            )
        else:
            for (rel, arity), where in zip(d.symbols, d.where or [pos] * len(d.symbols)):
                if arity < 1:
                    raise _ResolveError(where, "relational arity must be >= 1")
            m.signatures[d.name] = RelationalSignature(d.symbols)
    elif isinstance(d, OperationsDecl):
        try:
            m.operations[d.name] = LiftedSignature.build(d.ops)
        except LiftingError as exc:
            raise _ResolveError(pos, str(exc)) from None
    elif isinstance(d, AxiomsDecl):
        m.axioms[d.name] = _resolve_axioms(m, d)
    elif isinstance(d, StructureDecl):
        sig = _lookup(m.signatures, d.sig, "signature", pos)
        index = _index_elements(d.elements, pos, d.name)
        rels: dict[str, set] = {}
        for rel, tuples in d.rels:
            if rel not in sig:
                raise _ResolveError(pos, f"unknown relation {rel!r} in structure {d.name}")
            for t in tuples:
                if len(t) != sig.arity(rel):
                    raise _ResolveError(pos, f"{rel} expects {sig.arity(rel)}-tuples, got {_tuple(t)}")
                rels.setdefault(rel, set()).add(tuple(_element(index, x, d.name, pos) for x in t))
        s = Structure.build(sig, len(index), rels)
        if d.close is not None:
            ax = _lookup(m.axioms, d.close, "axioms", pos)
            if ax.sig != sig:
                raise _ResolveError(pos, f"axioms {d.close} are over a different signature")
            s = horn_closure(s, ax.type1())
        m.structures[d.name] = NamedStructure(s, d.elements)
    elif isinstance(d, AlgebraDecl):
        ns = _lookup(m.structures, d.carrier, "structure", pos)
        lsig = _lookup(m.operations, d.ops, "operations block", pos)
        index = {e: i for i, e in enumerate(ns.elements)}
        given = dict()
        for op, entries in d.tables:
            if op in given:
                raise _ResolveError(pos, f"operation {op!r} given twice")
            given[op] = entries
        tables = []
        n = len(ns.elements)
        for op, arity in lsig.symbols:
            if op not in given:
                raise _ResolveError(pos, f"missing table for operation {op!r}")
            table: dict[tuple[int, ...], int] = {}
            for args, v in given.pop(op):
                if len(args) != arity:
                    raise _ResolveError(pos, f"{op} expects {arity} arguments, got {_tuple(args)}")
                key = tuple(_element(index, x, d.carrier, pos) for x in args)
                val = _element(index, v, d.carrier, pos)
                if table.setdefault(key, val) != val:
                    raise _ResolveError(pos, f"conflicting entries for {op}{_tuple(args)}")
            missing = [t for t in itertools.product(range(n), repeat=arity) if t not in table]
            if missing:
                names = tuple(ns.elements[x] for x in missing[0])
                raise _ResolveError(pos, f"missing entry {op}{_tuple(names)}")
            tables.append(tuple(table[t] for t in itertools.product(range(n), repeat=arity)))
        if given:
            raise _ResolveError(pos, f"unknown operation {sorted(given)[0]!r}")
        m.algebras[d.name] = NamedAlgebra(Algebra(ns.structure, lsig, tuple(tables)), ns.elements, d.carrier)
    elif isinstance(d, MapDecl):
        dom = _lookup(m.structures, d.dom, "structure", pos)
        cod = _lookup(m.structures, d.cod, "structure", pos)
        di = {e: i for i, e in enumerate(dom.elements)}
        ci = {e: i for i, e in enumerate(cod.elements)}
        table: list[int | None] = [None] * len(dom.elements)
        for x, y in d.pairs:
            i = _element(di, x, d.dom, pos)
            if table[i] is not None:
                raise _ResolveError(pos, f"{x} mapped twice")
            table[i] = _element(ci, y, d.cod, pos)
        if None in table:
            raise _ResolveError(pos, f"map {d.name} is not total")
        m.maps[d.name] = StructureMap(dom.structure, cod.structure, tuple(table))
    elif isinstance(d, EquationDecl):
        m.equations[d.name] = equation_from_decl(d)
    elif isinstance(d, TheoryDecl):
        m.theory = _lookup(m.axioms, d.name, "axioms", pos)
    elif isinstance(d, CheckDecl):
        low, high = _CHECK_ARGS[d.kind]
        if not low <= len(d.args) <= high:
            want = str(low) if low == high else f"{low}-{high}"
            raise _ResolveError(pos, f"check {d.kind} takes {want} names, got {len(d.args)}")
        m.checks.append(d)


_CHECK_ARGS = {
    "in_C": (1, 2),
    "valid": (1, 2),
    "satisfies": (2, 2),
    "fails": (2, 2),
    "exactness": (1, 2),
    "reflexive": (1, 1),
    "not_reflexive": (1, 1),
}


def _resolve_axioms(m: Model, d: AxiomsDecl) -> AxiomSet:
    pos = d.pos
    if d.preset is None:
        sig = _lookup(m.signatures, d.over, "signature", pos)
        for cl in d.clauses:
            atoms = list(cl.premises) + ([cl.conclusion] if cl.is_type1 else [])
            for a in atoms:
                if a.rel not in sig:
                    raise _ResolveError(pos, f"unknown relation {a.rel!r} in axioms {d.name}")
        return AxiomSet(d.name, sig, d.clauses)
    if d.preset == "poset":
        return poset_preset(d.name)
    if not d.args:
        raise _ResolveError(pos, f"preset {d.preset} needs an argument")
    if d.preset == "partial":
        return partial_algebra_preset(_lookup(m.operations, d.args[0], "operations block", pos).base, d.name)
    q = _lookup(m.lattices, d.args[0], "lattice", pos)
    if d.preset == "lvalued":
        return lvalued_preset(q, d.name)
    bad = [f for f in d.args[1:] if f not in GMET_FLAGS]
    if bad:
        raise _ResolveError(pos, f"unknown metric flag {bad[0]!r}")
    return gmet_preset(q, d.args[1:], d.name)


_KIND_TABLES = {
    LatticeDecl: "lattices",
    SignatureDecl: "signatures",
    OperationsDecl: "operations",
    AxiomsDecl: "axioms",
    StructureDecl: "structures",
    AlgebraDecl: "algebras",
    MapDecl: "maps",
    EquationDecl: "equations",
}


def resolve(doc: Document) -> tuple[Model, list[Diagnostic]]:
    """Resolve declarations in order; each failing declaration yields one diagnostic."""
    m = Model(doc)
    diagnostics = []
    for d in doc.decls:
        table = _KIND_TABLES.get(type(d))
        try:
            if table is not None and d.name in getattr(m, table):
                raise _ResolveError(d.pos, f"duplicate declaration of {d.name!r}")
            _resolve_decl(m, d)
        except _ResolveError as exc:
            diagnostics.append(Diagnostic(exc.pos[0], exc.pos[1], exc.message, "resolution"))
        except Exception as exc:  # any invalid value becomes a located diagnostic
            diagnostics.append(Diagnostic(d.pos[0], d.pos[1], str(exc) or type(exc).__name__, "resolution"))
    return m, diagnostics


def load(text: str) -> Model:
    """Parse and resolve; raises :class:`DslError` on any diagnostic."""
    m, diagnostics = resolve(parse(text))
    if diagnostics:
        raise DslError(diagnostics)
    return m


def iter_decls(doc: Document, kind: type) -> Iterator:
    return (d for d in doc.decls if isinstance(d, kind))
