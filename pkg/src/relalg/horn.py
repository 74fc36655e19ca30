"""Horn clauses over relational signatures, clause satisfaction and axiom presets.

Clause schemas are expanded eagerly into finite clause lists.  Satisfaction
enumerates assignments with variables in sorted order and elements ascending,
so the reported witness is the lexicographically first violating assignment.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence, Union

from .reports import Verdict
from .signatures import (
    AlgebraicSignature,
    QuantityLattice,
    RelationalSignature,
    SignatureError,
    lattice_of,
    make_gmet_signature,
    make_partial_algebra_signature,
    make_poset_signature,
    quantity_name,
)
from .structures import Structure, encode

GMET_FLAGS = ("Refl", "Pos", "Sym", "Tri", "Max")


@dataclass(frozen=True)
class Atom:
    rel: str
    vars: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vars", tuple(self.vars))

    def __str__(self) -> str:
        return f"{self.rel}({', '.join(self.vars)})"


@dataclass(frozen=True)
class Equality:
    left: str
    right: str

    @property
    def vars(self) -> tuple[str, ...]:
        return (self.left, self.right)

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


Conclusion = Union[Atom, Equality]


@dataclass(frozen=True)
class HornClause:
    premises: tuple[Atom, ...]
    conclusion: Conclusion
    variables: tuple[str, ...] = ()
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        premises = tuple(self.premises)
        object.__setattr__(self, "premises", premises)
        used = {v for p in premises for v in p.vars} | set(self.conclusion.vars)
        variables = tuple(sorted(set(self.variables) | used))
        object.__setattr__(self, "variables", variables)

    @property
    def is_type1(self) -> bool:
        return isinstance(self.conclusion, Atom)

    def __str__(self) -> str:
        return f"{', '.join(map(str, self.premises))} |- {self.conclusion}".strip()


@dataclass(frozen=True)
class AxiomSet:
    name: str
    sig: RelationalSignature
    clauses: tuple[HornClause, ...]

    def __post_init__(self) -> None:
        clauses = tuple(self.clauses)
        object.__setattr__(self, "clauses", clauses)
        for cl in clauses:
            atoms = list(cl.premises) + ([cl.conclusion] if cl.is_type1 else [])
            for atom in atoms:
                if self.sig.arity(atom.rel) != len(atom.vars):
                    raise SignatureError(f"arity mismatch in {atom}")

    def __len__(self) -> int:
        return len(self.clauses)

    def type1(self) -> "AxiomSet":
        """The fragment without equality conclusions (the axioms of C')."""
        return AxiomSet(self.name + "'", self.sig, tuple(c for c in self.clauses if c.is_type1))

    def type2(self) -> tuple[HornClause, ...]:
        return tuple(c for c in self.clauses if not c.is_type1)


def premise_assignments(a: Structure, cl_vars: Sequence[str], premises: Sequence[Atom]) -> Iterator[dict[str, int]]:
    """All assignments of ``cl_vars`` making every premise true, in lexicographic order."""
    variables = tuple(cl_vars)
    pos = {v: i for i, v in enumerate(variables)}
    groups: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in variables]
    for atom in premises:
        idx = tuple(pos[v] for v in atom.vars)
        groups[max(idx)].append((a.sig.index(atom.rel), idx))
    values = [0] * len(variables)

    def go(i: int) -> Iterator[dict[str, int]]:
        if i == len(variables):
            yield dict(zip(variables, values))
            return
        for x in range(a.size):
            values[i] = x
            if all(tuple(values[j] for j in idx) in a.rels[k] for k, idx in groups[i]):
                yield from go(i + 1)

    yield from go(0)


def _conclusion_holds(a: Structure, cl: HornClause, h: dict[str, int]) -> bool:
    c = cl.conclusion
    if isinstance(c, Equality):
        return h[c.left] == h[c.right]
    return tuple(h[v] for v in c.vars) in a.rel(c.rel)


def satisfies_clause(a: Structure, cl: HornClause) -> Verdict:
    if not cl.variables:
        return Verdict(True)
    for h in premise_assignments(a, cl.variables, cl.premises):
        if not _conclusion_holds(a, cl, h):
            return Verdict(False, witness=h, reason=cl.label or str(cl))
    return Verdict(True)


def in_C(a: Structure, ax: AxiomSet) -> Verdict:
    """Membership in the subcategory axiomatized by ``ax``; failures list (clause, witness)."""
    if a.sig != ax.sig:
        raise SignatureError("structure and axioms use different signatures")
    failures = []
    for cl in ax.clauses:
        v = satisfies_clause(a, cl)
        if not v:
            failures.append((cl.label or str(cl), v.witness))
    return Verdict(not failures, witness=failures[0] if failures else None, failures=tuple(failures))


# ---------------------------------------------------------------- presets


def gmet_preset(q: QuantityLattice, flags: Iterable[str], name: str = "gmet") -> AxiomSet:
    """The generalized-metric theory over the finite chain ``q``.

    Always contains (Up) and the Top clause ``|- x =:1 y``; the primed axioms
    appear according to ``flags``.  (Arch) is not instantiated: over a finite
    chain every set {e : x =:e y} that is nonempty has a least element, so the
    schema carries no content, while its literal finite instances would force
    =:e to coincide with =:succ(e).
    """
    flags = set(flags)
    unknown = flags - set(GMET_FLAGS)
    if unknown:
        raise ValueError(f"unknown metric flags {sorted(unknown)}")
    sig = make_gmet_signature(q)
    e = q.elements
    r = [quantity_name(x) for x in e]
    clauses: list[HornClause] = []
    if "Refl" in flags:
        clauses.append(HornClause((), Atom(r[0], ("x", "x")), label="Refl'"))
    if "Pos" in flags:
        clauses.append(HornClause((Atom(r[0], ("x", "y")),), Equality("x", "y"), label="Pos'"))
    if "Sym" in flags:
        for i in range(len(e)):
            clauses.append(HornClause((Atom(r[i], ("x", "y")),), Atom(r[i], ("y", "x")), label=f"Sym'({e[i]})"))
    if "Tri" in flags:
        for i, j in itertools.product(range(len(e)), repeat=2):
            if e[i] + e[j] <= 1:
                clauses.append(
                    HornClause(
                        (Atom(r[i], ("x", "y")), Atom(r[j], ("y", "z"))),
                        Atom(r[q.add[i][j]], ("x", "z")),
                        label=f"Tri'({e[i]},{e[j]})",
                    )
                )
    if "Max" in flags:
        for i, j in itertools.product(range(len(e)), repeat=2):
            clauses.append(
                HornClause(
                    (Atom(r[i], ("x", "y")), Atom(r[j], ("y", "z"))),
                    Atom(r[q.join[i][j]], ("x", "z")),
                    label=f"Max'({e[i]},{e[j]})",
                )
            )
    clauses.extend(_up_clauses(q))
    clauses.append(HornClause((), Atom(r[-1], ("x", "y")), label="Top"))
    return AxiomSet(name, sig, tuple(clauses))


def _up_clauses(q: QuantityLattice) -> list[HornClause]:
    e = q.elements
    return [
        HornClause(
            (Atom(quantity_name(e[i]), ("x", "y")),),
            Atom(quantity_name(e[j]), ("x", "y")),
            label=f"Up({e[i]},{e[j]})",
        )
        for i, j in itertools.combinations(range(len(e)), 2)
    ]


def lvalued_preset(q: QuantityLattice, name: str = "lvalued") -> AxiomSet:
    """L-valued relations over a finite chain: the (Up) instances."""
    return AxiomSet(name, make_gmet_signature(q), tuple(_up_clauses(q)))


def poset_preset(name: str = "poset") -> AxiomSet:
    leq = "leq"
    return AxiomSet(
        name,
        make_poset_signature(),
        (
            HornClause((), Atom(leq, ("x", "x")), label="refl"),
            HornClause((Atom(leq, ("x", "y")), Atom(leq, ("y", "z"))), Atom(leq, ("x", "z")), label="trans"),
            HornClause((Atom(leq, ("x", "y")), Atom(leq, ("y", "x"))), Equality("x", "y"), label="antisym"),
        ),
    )


def partial_algebra_preset(p: AlgebraicSignature, name: str = "partial") -> AxiomSet:
    sig = make_partial_algebra_signature(p)
    clauses = []
    for f, n in p.symbols:
        xs = tuple(f"x{i}" for i in range(n))
        clauses.append(
            HornClause(
                (Atom(f"alpha_{f}", xs + ("y",)), Atom(f"alpha_{f}", xs + ("z",))),
                Equality("y", "z"),
                label=f"functional({f})",
            )
        )
    return AxiomSet(name, sig, tuple(clauses))


# ------------------------------------------------------ metric translation


class MetricError(ValueError):
    pass


def metric_to_structure(d: Sequence[Sequence], q: QuantityLattice) -> Structure:
    """Relational encoding: a =:e b iff d(a, b) <= e."""
    n = len(d)
    sig = make_gmet_signature(q)
    for row in d:
        if len(row) != n:
            raise MetricError("distance matrix must be square")
        for v in row:
            if Fraction(v) not in q.elements:
                raise MetricError(f"distance {v} is not a lattice element")
    rels = [
        frozenset((a, b) for a in range(n) for b in range(n) if Fraction(d[a][b]) <= e) for e in q.elements
    ]
    return Structure(sig, n, tuple(rels))


def structure_to_metric(a: Structure) -> tuple[tuple[Fraction, ...], ...]:
    """d(a, b) = least e with a =:e b, and 1 when there is none."""
    q = lattice_of(a.sig)
    d = [[Fraction(1)] * a.size for _ in range(a.size)]
    for e, r in reversed(list(zip(q.elements, a.rels))):
        for x, y in r:
            d[x][y] = min(d[x][y], e)
    return tuple(tuple(row) for row in d)


def metric_axioms_hold(d: Sequence[Sequence], flags: Iterable[str]) -> bool:
    """Check the metric axioms on a distance matrix directly, with exact addition."""
    flags = set(flags)
    n = len(d)
    pts = range(n)
    if "Refl" in flags and any(d[a][a] != 0 for a in pts):
        return False
    if "Pos" in flags and any(d[a][b] == 0 and a != b for a in pts for b in pts):
        return False
    if "Sym" in flags and any(d[a][b] != d[b][a] for a in pts for b in pts):
        return False
    if "Tri" in flags and any(d[a][c] > d[a][b] + d[b][c] for a in pts for b in pts for c in pts):
        return False
    if "Max" in flags and any(d[a][c] > max(d[a][b], d[b][c]) for a in pts for b in pts for c in pts):
        return False
    return True


# ------------------------------------------------------ grounded theories


@dataclass(frozen=True)
class GroundTheory:
    """Horn clauses grounded over the carrier ``0..size-1``.

    A relation family is a bitmask over *slots*; slot ``offset[k] + code(t)``
    stands for tuple ``t`` of symbol ``k``.  ``rules`` are the type-1 ground
    instances (premise mask, conclusion bit), ``eq_rules`` the type-2 ones
    (premise mask, a, b) with a != b.
    """

    sig: RelationalSignature
    size: int
    offsets: tuple[int, ...]
    slots: int
    rules: tuple[tuple[int, int], ...]
    eq_rules: tuple[tuple[int, int, int], ...]

    def bit(self, k: int, t: Sequence[int]) -> int:
        return 1 << (self.offsets[k] + encode(t, [self.size] * len(t)))

    def mask_of(self, a: Structure) -> int:
        m = 0
        for k, r in enumerate(a.rels):
            for t in r:
                m |= self.bit(k, t)
        return m

    def structure_of(self, mask: int) -> Structure:
        rels = []
        for k, (_, arity) in enumerate(self.sig.symbols):
            out = []
            for code, t in enumerate(itertools.product(range(self.size), repeat=arity)):
                if mask >> (self.offsets[k] + code) & 1:
                    out.append(t)
            rels.append(frozenset(out))
        return Structure(self.sig, self.size, tuple(rels))

    def close(self, mask: int) -> int:
        changed = True
        while changed:
            changed = False
            for pm, cb in self.rules:
                if mask & pm == pm and not mask & cb:
                    mask |= cb
                    changed = True
        return mask

    def satisfied(self, mask: int) -> bool:
        """The family satisfies every ground clause (closed, no equality violation)."""
        for pm, cb in self.rules:
            if mask & pm == pm and not mask & cb:
                return False
        for pm, _, _ in self.eq_rules:
            if mask & pm == pm:
                return False
        return True

    def eq_violation(self, mask: int) -> tuple[int, int] | None:
        for pm, x, y in self.eq_rules:
            if mask & pm == pm:
                return x, y
        return None


@lru_cache(maxsize=256)
def ground(ax: AxiomSet, size: int) -> GroundTheory:
    sig = ax.sig
    offsets = []
    total = 0
    for _, arity in sig.symbols:
        offsets.append(total)
        total += size**arity
    offs = tuple(offsets)

    def bit(k: int, t: Sequence[int]) -> int:
        return 1 << (offs[k] + encode(t, [size] * len(t)))

    rules: set[tuple[int, int]] = set()
    eq_rules: set[tuple[int, int, int]] = set()
    for cl in ax.clauses:
        for values in itertools.product(range(size), repeat=len(cl.variables)):
            h = dict(zip(cl.variables, values))
            pm = 0
            for atom in cl.premises:
                pm |= bit(sig.index(atom.rel), [h[v] for v in atom.vars])
            c = cl.conclusion
            if isinstance(c, Atom):
                cb = bit(sig.index(c.rel), [h[v] for v in c.vars])
                if not pm & cb:
                    rules.add((pm, cb))
            elif h[c.left] != h[c.right]:
                eq_rules.add((pm, h[c.left], h[c.right]))
    return GroundTheory(sig, size, offs, total, tuple(sorted(rules)), tuple(sorted(eq_rules)))


def horn_closure(a: Structure, ax: AxiomSet) -> Structure:
    """Least structure above ``a`` on the same carrier satisfying the type-1 clauses."""
    g = ground(ax, a.size)
    return g.structure_of(g.close(g.mask_of(a)))


@dataclass(frozen=True)
class RoundTrip:
    points: int
    metrics: int
    structures: int
    failure: object = None

    @property
    def ok(self) -> bool:
        return self.failure is None and self.metrics == self.structures

    def __bool__(self) -> bool:
        return self.ok


MAX_ROUND_TRIP_CANDIDATES = 2_000_000


def gmet_round_trip(q: QuantityLattice, flags: Iterable[str], points: int) -> RoundTrip:
    """Exhaustive check of the metric/structure correspondence on ``points`` points.

    Every distance matrix over ``q`` satisfying ``flags`` must encode to a
    structure in C that decodes back to it; every candidate structure whose
    relations are upward closed with a total top relation (a superset of C,
    since (Up) and Top belong to the preset) that lies in C must decode to a
    matrix satisfying ``flags`` and encode back to itself.  Symmetric and
    zero-diagonal shapes are enumerated directly when Sym / Refl are chosen.
    """
    flags = tuple(flags)
    ax = gmet_preset(q, flags)
    e = q.elements
    n = points
    cells = [(i, j) for i in range(n) for j in range(n) if i != j and ("Sym" not in flags or i < j)]
    if "Refl" not in flags:
        cells += [(i, i) for i in range(n)]
    if len(e) ** len(cells) > MAX_ROUND_TRIP_CANDIDATES:
        raise ValueError(f"{len(e) ** len(cells)} candidates exceed the round-trip bound")
    g = ground(ax, n)
    # level_bits[i][j][k]: the bits of (i, j) in every relation from level k up
    level_bits = [
        [[sum(g.bit(k2, (i, j)) for k2 in range(k, len(e))) for k in range(len(e))] for j in range(n)]
        for i in range(n)
    ]
    level = {v: k for k, v in enumerate(e)}
    metrics = structures = 0
    for values in itertools.product(e, repeat=len(cells)):
        d = [[Fraction(0)] * n for _ in range(n)]
        for (i, j), v in zip(cells, values):
            d[i][j] = v
            if "Sym" in flags:
                d[j][i] = v
        mask = 0
        for i in range(n):
            for j in range(n):
                mask |= level_bits[i][j][level[d[i][j]]]
        in_c = g.satisfied(mask)
        if metric_axioms_hold(d, flags):
            metrics += 1
            if not in_c:
                return RoundTrip(n, metrics, structures, ("encoding not in C", d))
            if structure_to_metric(metric_to_structure(d, q)) != tuple(map(tuple, d)):
                return RoundTrip(n, metrics, structures, ("metric round trip", d))
        # the same cells read as the least levels of an upward-closed family
        if in_c:
            structures += 1
            a = g.structure_of(mask)
            back = structure_to_metric(a)
            if not metric_axioms_hold(back, flags) or metric_to_structure(back, q) != a:
                return RoundTrip(n, metrics, structures, ("structure round trip", d))
    return RoundTrip(n, metrics, structures)
