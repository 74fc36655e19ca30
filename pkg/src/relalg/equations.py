"""c-clustered equations, their satisfaction, and the translation of abstract
equations given by a surjection out of a free slice.

Variables of an equation are named; terms refer to them by position
(``Var(i)`` is ``variables[i]``).  ``c=None`` stands for the cardinal
infinity: it disables the clusteredness constraint and never affects
satisfaction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import networkx as nx

from .algebras import Algebra, algebra_product, factor_tables, is_valid, subalgebras
from .free_terms import FreeAlgebraSlice, Term, Var, build_free_slice, check_term, extend, extension_table
from .horn import Atom, AxiomSet, horn_closure, premise_assignments
from .reports import Verdict
from .structures import Structure, morphisms
from .quotients_exactness import DEFAULT_MAX_CARRIER, enumerate_quotients, is_c_reflexive


class EquationError(ValueError):
    pass


@dataclass(frozen=True)
class RelAtomOnTerms:
    rel: str
    terms: tuple[Term, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))


@dataclass(frozen=True)
class TermEquality:
    left: Term
    right: Term


EquationConclusion = Union[RelAtomOnTerms, TermEquality]


def _conclusion_terms(c: EquationConclusion) -> tuple[Term, ...]:
    return c.terms if isinstance(c, RelAtomOnTerms) else (c.left, c.right)


@dataclass(frozen=True)
class ClusteredEquation:
    variables: tuple[str, ...]
    premises: tuple[Atom, ...]
    conclusion: EquationConclusion
    c: int | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "premises", tuple(self.premises))
        if len(set(self.variables)) != len(self.variables):
            raise EquationError("variable names must be unique")
        if self.c is not None and self.c < 1:
            raise EquationError("c must be a positive integer or None (infinity)")
        known = set(self.variables)
        for atom in self.premises:
            if not set(atom.vars) <= known:
                raise EquationError(f"premise {atom} uses an undeclared variable")
        for t in _conclusion_terms(self.conclusion):
            for v in _term_vars(t):
                if not 0 <= v < len(self.variables):
                    raise EquationError(f"variable index {v} out of range")
        if self.c is not None:
            big = max(gaifman_components(self), key=len, default=frozenset())
            if len(big) >= self.c:
                raise EquationError(
                    f"not {self.c}-clustered: component {sorted(big)} has {len(big)} variables"
                )

    @property
    def unconditional(self) -> bool:
        return not self.premises

    def check_signature(self, a: Algebra) -> None:
        for atom in self.premises:
            if a.rsig.arity(atom.rel) != len(atom.vars):
                raise EquationError(f"arity mismatch in premise {atom}")
        if isinstance(self.conclusion, RelAtomOnTerms):
            if a.rsig.arity(self.conclusion.rel) != len(self.conclusion.terms):
                raise EquationError(f"arity mismatch in conclusion {self.conclusion.rel}")
        for t in _conclusion_terms(self.conclusion):
            check_term(t, a.sig.base, len(self.variables))


def _term_vars(t: Term) -> Iterable[int]:
    if isinstance(t, Var):
        yield t.index
    else:
        for s in t.args:
            yield from _term_vars(s)


def gaifman_components(eq: ClusteredEquation) -> list[frozenset[str]]:
    """Connected components of the Gaifman graph of the premises, in order of
    each component's first variable in the declaration."""
    g = nx.Graph()
    g.add_nodes_from(eq.variables)
    for atom in eq.premises:
        for x, y in itertools.combinations(atom.vars, 2):
            g.add_edge(x, y)
    order = {v: i for i, v in enumerate(eq.variables)}
    comps = [frozenset(c) for c in nx.connected_components(g)]
    return sorted(comps, key=lambda c: min(order[v] for v in c))


def is_clustered(eq: ClusteredEquation, c: int | None) -> bool:
    return c is None or all(len(comp) < c for comp in gaifman_components(eq))


def _conclusion_holds(a: Algebra, eq: ClusteredEquation, h: Sequence[int]) -> bool:
    ev = extend(h, a)
    c = eq.conclusion
    if isinstance(c, RelAtomOnTerms):
        return tuple(ev(t) for t in c.terms) in a.carrier.rels[a.rsig.index(c.rel)]
    return ev(c.left) == ev(c.right)


def satisfies_equation(a: Algebra, eq: ClusteredEquation) -> Verdict:
    """Every map h of the variables into the carrier that satisfies the
    premises satisfies the conclusion; the witness is the first violating
    assignment (variables in declaration order, elements ascending)."""
    eq.check_signature(a)
    for h in premise_assignments(a.carrier, eq.variables, eq.premises):
        values = [h[v] for v in eq.variables]
        if not _conclusion_holds(a, eq, values):
            return Verdict(False, witness=dict(h))
    return Verdict(True)


def satisfies_all(a: Algebra, eqs: Iterable[ClusteredEquation]) -> Verdict:
    for eq in eqs:
        v = satisfies_equation(a, eq)
        if not v:
            return Verdict(False, witness=(eq.name, v.witness))
    return Verdict(True)


# ------------------------------------------------------- closure soundness


@dataclass(frozen=True)
class ClosureReport:
    members: int
    products: int
    subalgebras: int
    quotients: int
    skipped_quotients: int
    skipped_failing: int
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def check_closure_soundness(
    eqs: Sequence[ClusteredEquation],
    pool: Sequence[Algebra],
    c: int | None,
    ax: AxiomSet,
    quotients: str = "reflexive",
    max_product: int = DEFAULT_MAX_CARRIER,
    max_carrier: int = DEFAULT_MAX_CARRIER,
) -> ClosureReport:
    """Check that the models of ``eqs`` in ``pool`` are closed under binary
    products (up to ``max_product`` elements), subalgebras, and quotients.

    ``quotients="reflexive"`` checks only c-reflexive C-quotients and counts
    the non-reflexive ones (``skipped_quotients``), recording how many of
    those actually break an equation (``skipped_failing``) — these are not
    violations.  ``quotients="all"`` checks every C-quotient.
    """
    if quotients not in ("reflexive", "all"):
        raise ValueError("quotients must be 'reflexive' or 'all'")
    members = [a for a in pool if satisfies_all(a, eqs)]
    violations = []
    n_prod = n_sub = n_quot = skipped = skipped_bad = 0
    for i, a in enumerate(members):
        for j, b in enumerate(members):
            if a.size * b.size > max_product:
                continue
            p, _ = algebra_product([a, b])
            n_prod += 1
            v = satisfies_all(p, eqs)
            if not v:
                violations.append(("product", (i, j), v.witness))
        for subset, sub, _ in subalgebras(a):
            n_sub += 1
            v = satisfies_all(sub, eqs)
            if not v:
                violations.append(("subalgebra", (i, subset), v.witness))
        for q in enumerate_quotients(a, ax, max_carrier):
            v = satisfies_all(q.cod, eqs)
            if quotients == "reflexive" and not is_c_reflexive(q, c):
                skipped += 1
                skipped_bad += not v
                continue
            n_quot += 1
            if not v:
                violations.append(("quotient", (i, q.table), v.witness))
    return ClosureReport(len(members), n_prod, n_sub, n_quot, skipped, skipped_bad, tuple(violations))


# ------------------------------------------------------ abstract equations


@dataclass(frozen=True)
class AbstractEquationInstance:
    """A surjection e from the depth-``depth`` free slice over ``x`` onto ``target``."""

    x: Structure
    slice: FreeAlgebraSlice
    target: Algebra
    e_table: tuple[int, ...]
    c: int | None = None
    names: tuple[str, ...] = ()
    ax: AxiomSet | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "e_table", tuple(self.e_table))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i}" for i in range(self.x.size)))
        if len(self.names) != self.x.size:
            raise EquationError("one variable name per element of x expected")
        if len(self.e_table) != len(self.slice):
            raise EquationError("e must be defined on every slice term")
        if set(self.e_table) != set(range(self.target.size)):
            raise EquationError("e must be surjective")

    @property
    def depth(self) -> int:
        return self.slice.depth

    def essential(self) -> Structure:
        """x without the atoms that hold in every structure of C on its carrier.

        Those atoms (e.g. the total top-quantity relation) carry no constraint
        over C and would otherwise connect every pair of variables.
        """
        if self.ax is None:
            return self.x
        forced = horn_closure(Structure.discrete(self.x.sig, self.x.size), self.ax.type1())
        return self.x.with_rels([r - f for r, f in zip(self.x.rels, forced.rels)])

    def validate(self, ax: AxiomSet | None = None) -> Verdict:
        """E valid (and in C), x has components of size < c, e preserves relations."""
        if not is_valid(self.target, ax or self.ax):
            return Verdict(False, reason="target algebra invalid")
        if self.c is not None:
            comps = _structure_components(self.essential())
            big = max(comps, key=len, default=())
            if len(big) >= self.c:
                return Verdict(False, witness=tuple(sorted(big)), reason="x is not c-clustered")
        bad = _unpreserved(self.slice.structure, self.target.carrier, self.e_table)
        if bad is not None:
            return Verdict(False, witness=bad, reason="e does not preserve relations")
        return Verdict(True)


def _unpreserved(dom: Structure, cod: Structure, table: Sequence[int]):
    for name, r, s in zip(dom.sig.names, dom.rels, cod.rels):
        for t in sorted(r):
            if tuple(table[x] for x in t) not in s:
                return name, t
    return None


def _structure_components(x: Structure) -> list[tuple[int, ...]]:
    g = nx.Graph()
    g.add_nodes_from(range(x.size))
    for r in x.rels:
        for t in r:
            for u, v in itertools.combinations(t, 2):
                g.add_edge(u, v)
    return sorted(tuple(sorted(c)) for c in nx.connected_components(g))


def abstract_instance(
    x: Structure,
    lsig,
    depth: int,
    target: Algebra,
    generators: Sequence[int],
    c: int | None = None,
    names: Sequence[str] = (),
    ax: AxiomSet | None = None,
) -> AbstractEquationInstance:
    """The instance whose e is the extension of ``generators``: x -> target."""
    s = build_free_slice(x, lsig, depth)
    return AbstractEquationInstance(x, s, target, extension_table(generators, target, s), c, tuple(names), ax)


def abstract_satisfies(a: Algebra, inst: AbstractEquationInstance) -> Verdict:
    """Every preserving h: x -> a has h# factoring through e on the slice."""
    for h in morphisms(inst.x, a.carrier):
        table = extension_table(h.table, a, inst.slice)
        g, condition, witness = factor_tables(inst.e_table, inst.target.carrier, table, a.carrier)
        if g is None:
            return Verdict(False, witness={"h": h.table, "condition": condition, "at": witness})
    return Verdict(True)


def translate_abstract_equation(inst: AbstractEquationInstance) -> tuple[tuple[Atom, ...], list[ClusteredEquation]]:
    """Premises from the (essential) relations of x and one equation per related
    term tuple of the target and per identified term pair (i < j)."""
    x, names = inst.essential(), inst.names
    phi = tuple(
        Atom(rel, tuple(names[v] for v in t))
        for rel, r in zip(x.sig.names, x.rels)
        for t in sorted(r)
    )
    terms = inst.slice.terms
    e = inst.e_table
    target = inst.target.carrier
    eqs: list[ClusteredEquation] = []
    for rel, r, (_, arity) in zip(target.sig.names, target.rels, target.sig.symbols):
        for idx in itertools.product(range(len(terms)), repeat=arity):
            if tuple(e[i] for i in idx) in r:
                eqs.append(
                    ClusteredEquation(names, phi, RelAtomOnTerms(rel, tuple(terms[i] for i in idx)), inst.c)
                )
    for i, j in itertools.combinations(range(len(terms)), 2):
        if e[i] == e[j]:
            eqs.append(ClusteredEquation(names, phi, TermEquality(terms[i], terms[j]), inst.c))
    return phi, eqs

