"""Algebras over finite structures for a lifted signature.

An operation table for an n-ary symbol is a dense tuple indexed by the
lexicographic code of the argument tuple.  Validity (each operation being a
morphism out of the lifted power) is reported, not enforced, so invalid
algebras can be built as fixtures.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .horn import AxiomSet, in_C
from .reports import Verdict
from .signatures import LiftedSignature, RelationalSignature, SignatureError
from .structures import (
    Structure,
    StructureMap,
    classify_map,
    decode,
    encode,
    first_unpreserved,
    induced,
    morphisms,
    product,
    relabel,
)


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class Algebra:
    carrier: Structure
    sig: LiftedSignature
    ops: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        ops = tuple(tuple(t) for t in self.ops)
        object.__setattr__(self, "ops", ops)
        if len(ops) != len(self.sig):
            raise AlgebraError("one table per operation symbol expected")
        n = self.carrier.size
        for (name, arity), table in zip(self.sig.symbols, ops):
            if len(table) != n**arity:
                raise AlgebraError(f"{name}: table must have {n ** arity} entries")
            if any(not 0 <= v < n for v in table):
                raise AlgebraError(f"{name}: table value out of range")

    @classmethod
    def from_functions(
        cls, carrier: Structure, sig: LiftedSignature, funcs: Mapping[str, Callable[..., int]]
    ) -> "Algebra":
        tables = []
        for name, arity in sig.symbols:
            f = funcs[name]
            tables.append(
                tuple(f(*args) for args in itertools.product(range(carrier.size), repeat=arity))
            )
        return cls(carrier, sig, tuple(tables))

    @property
    def size(self) -> int:
        return self.carrier.size

    @property
    def rsig(self) -> RelationalSignature:
        return self.carrier.sig

    def op(self, name: str, *args: int) -> int:
        k = self.sig.base.index(name)
        return self.ops[k][encode(args, [self.size] * len(args))]

    def apply(self, k: int, args: Sequence[int]) -> int:
        return self.ops[k][encode(args, [self.size] * len(args))]

    def table_map(self, k: int) -> StructureMap:
        """Operation ``k`` as a map out of the lifted power structure."""
        name, arity = self.sig.symbols[k]
        lifted = self.sig.liftings[k].apply(self.carrier, arity)
        return StructureMap(lifted, self.carrier, self.ops[k])


@dataclass(frozen=True)
class AlgebraMap:
    dom: Algebra
    cod: Algebra
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", tuple(self.table))
        if self.dom.sig != self.cod.sig:
            raise SignatureError("algebras have different lifted signatures")
        if self.dom.rsig != self.cod.rsig:
            raise SignatureError("algebras have different relational signatures")
        if len(self.table) != self.dom.size or any(not 0 <= y < self.cod.size for y in self.table):
            raise AlgebraError("map table must be total and in range")

    @property
    def structure_map(self) -> StructureMap:
        return StructureMap(self.dom.carrier, self.cod.carrier, self.table)


def identity(a: Algebra) -> AlgebraMap:
    return AlgebraMap(a, a, tuple(range(a.size)))


def compose(g: AlgebraMap, f: AlgebraMap) -> AlgebraMap:
    if f.cod != g.dom:
        raise AlgebraError("maps are not composable")
    return AlgebraMap(f.dom, g.cod, tuple(g.table[y] for y in f.table))


def validate_algebra(a: Algebra, ax: AxiomSet | None = None) -> Verdict:
    """Per-operation relation-preservation and, optionally, carrier membership in C.

    Failures are ``(op, relation, lifted tuple as argument tuples)`` or
    ``("carrier", clause, assignment)``.
    """
    failures = []
    for k, (name, arity) in enumerate(a.sig.symbols):
        f = a.table_map(k)
        sizes = [a.size] * arity
        for rname, r, s in zip(a.rsig.names, f.dom.rels, a.carrier.rels):
            for t in sorted(r):
                if tuple(f.table[x] for x in t) not in s:
                    failures.append((name, rname, tuple(decode(x, sizes) for x in t)))
                    break
    if ax is not None:
        v = in_C(a.carrier, ax)
        failures.extend(("carrier",) + f for f in v.failures)
    return Verdict(not failures, witness=failures[0] if failures else None, failures=tuple(failures))


def is_valid(a: Algebra, ax: AxiomSet | None = None) -> bool:
    for k in range(len(a.sig)):
        if first_unpreserved(a.table_map(k)) is not None:
            return False
    return ax is None or bool(in_C(a.carrier, ax))


def first_nonequivariant(h: AlgebraMap) -> tuple[str, tuple[int, ...]] | None:
    a, b = h.dom, h.cod
    for k, (name, arity) in enumerate(a.sig.symbols):
        for args in itertools.product(range(a.size), repeat=arity):
            if h.table[a.apply(k, args)] != b.apply(k, [h.table[x] for x in args]):
                return name, args
    return None


def check_algebra_morphism(h: AlgebraMap) -> Verdict:
    bad = first_unpreserved(h.structure_map)
    if bad is not None:
        return Verdict(False, witness=bad, reason="relation not preserved")
    bad = first_nonequivariant(h)
    if bad is not None:
        return Verdict(False, witness=bad, reason="operation not preserved")
    return Verdict(True)


def algebra_product(
    factors: Sequence[Algebra], sig: LiftedSignature | None = None, rsig: RelationalSignature | None = None
) -> tuple[Algebra, list[AlgebraMap]]:
    """Coordinatewise product; ``sig`` and ``rsig`` are needed only for the empty product."""
    factors = list(factors)
    if factors:
        sig, rsig = factors[0].sig, factors[0].rsig
        if any(f.sig != sig or f.rsig != rsig for f in factors):
            raise SignatureError("factors must share a signature")
    elif sig is None or rsig is None:
        raise AlgebraError("the empty product needs explicit signatures")
    carrier, projections = product([f.carrier for f in factors], sig=rsig)
    sizes = [f.size for f in factors]
    elements = [decode(x, sizes) for x in range(carrier.size)]
    tables = []
    for k, (_, arity) in enumerate(sig.symbols):
        table = []
        for args in itertools.product(range(carrier.size), repeat=arity):
            coords = [elements[x] for x in args]
            table.append(
                encode([f.apply(k, [c[i] for c in coords]) for i, f in enumerate(factors)], sizes)
            )
        tables.append(tuple(table))
    p = Algebra(carrier, sig, tuple(tables))
    return p, [AlgebraMap(p, f, pi.table) for f, pi in zip(factors, projections)]


def closure_under_ops(a: Algebra, seed: Iterable[int]) -> frozenset[int]:
    closed = set(seed)
    if any(not 0 <= x < a.size for x in closed):
        raise AlgebraError("seed index out of range")
    while True:
        new = set()
        for k, (_, arity) in enumerate(a.sig.symbols):
            for args in itertools.product(sorted(closed), repeat=arity):
                v = a.apply(k, args)
                if v not in closed:
                    new.add(v)
        if not new:
            return frozenset(closed)
        closed |= new


def restrict(a: Algebra, subset: Iterable[int]) -> tuple[Algebra, AlgebraMap]:
    """The subalgebra on an op-closed subset, with its inclusion."""
    sub, keep = induced(a.carrier, subset)
    pos = {x: i for i, x in enumerate(keep)}
    tables = []
    for k, (_, arity) in enumerate(a.sig.symbols):
        table = []
        for args in itertools.product(keep, repeat=arity):
            v = a.apply(k, args)
            if v not in pos:
                raise AlgebraError("subset is not closed under the operations")
            table.append(pos[v])
        tables.append(tuple(table))
    b = Algebra(sub, a.sig, tuple(tables))
    return b, AlgebraMap(b, a, keep)


def subalgebra_generated(a: Algebra, seed: Iterable[int]) -> tuple[tuple[int, ...], Algebra, AlgebraMap]:
    closed = closure_under_ops(a, seed)
    b, inc = restrict(a, closed)
    return inc.table, b, inc


def subalgebras(a: Algebra) -> list[tuple[tuple[int, ...], Algebra, AlgebraMap]]:
    """All op-closed subsets (the empty one included when there are no constants)."""
    out = []
    for k in range(a.size + 1):
        for subset in itertools.combinations(range(a.size), k):
            if closure_under_ops(a, subset) == frozenset(subset):
                b, inc = restrict(a, subset)
                out.append((subset, b, inc))
    return out


def image_factorize_algebra(h: AlgebraMap) -> tuple[AlgebraMap, AlgebraMap]:
    v = check_algebra_morphism(h)
    if not v:
        raise AlgebraError(f"not an algebra morphism: {v.reason} at {v.witness}")
    middle, embed = restrict(h.cod, set(h.table))
    pos = {y: i for i, y in enumerate(embed.table)}
    return AlgebraMap(h.dom, middle, tuple(pos[y] for y in h.table)), embed


@dataclass(frozen=True)
class Factorization:
    """Outcome of :func:`factor_through`: the factor map, or the violated condition."""

    map: AlgebraMap | None
    condition: str = ""
    witness: object = None

    def __bool__(self) -> bool:
        return self.map is not None


def factor_tables(
    e_table: Sequence[int],
    b: Structure,
    h_table: Sequence[int],
    c: Structure,
) -> tuple[tuple[int, ...] | None, str, object]:
    """Decide h = g . e on carriers, given e surjective onto ``b``.

    Checks the kernel condition and the relation condition (R_B(e a) implies
    R_C(h a)); returns (g, "", None) or (None, condition, witness).
    """
    g: list[int | None] = [None] * b.size
    rep: list[int | None] = [None] * b.size
    for x, (y, z) in enumerate(zip(e_table, h_table)):
        if g[y] is None:
            g[y], rep[y] = z, x
        elif g[y] != z:
            return None, "kernel", (rep[y], x)
    if any(v is None for v in g):
        raise AlgebraError("e is not surjective")
    for name, rb, rc in zip(b.sig.names, b.rels, c.rels):
        for t in sorted(rb):
            if tuple(g[y] for y in t) not in rc:
                return None, "relation", (name, tuple(rep[y] for y in t))
    return tuple(g), "", None  # type: ignore[arg-type]


def factor_through(e: AlgebraMap, h: AlgebraMap) -> Factorization:
    """The unique g with h = g . e, when the Homomorphism Theorem's conditions hold."""
    if e.dom != h.dom:
        raise AlgebraError("e and h must share their domain")
    if not classify_map(e.structure_map).surjective:
        raise AlgebraError("e must be surjective")
    g, condition, witness = factor_tables(e.table, e.cod.carrier, h.table, h.cod.carrier)
    if g is None:
        return Factorization(None, condition, witness)
    return Factorization(AlgebraMap(e.cod, h.cod, g))


def algebra_morphisms(a: Algebra, b: Algebra) -> list[AlgebraMap]:
    """All algebra morphisms, by filtering structure morphisms for equivariance."""
    out = []
    for f in morphisms(a.carrier, b.carrier):
        h = AlgebraMap(a, b, f.table)
        if first_nonequivariant(h) is None:
            out.append(h)
    return out


def relabel_algebra(a: Algebra, perm: Sequence[int]) -> Algebra:
    """Isomorphic copy along x -> perm[x]."""
    carrier = relabel(a.carrier, perm)
    inv = [0] * a.size
    for x, y in enumerate(perm):
        inv[y] = x
    tables = []
    for k, (_, arity) in enumerate(a.sig.symbols):
        tables.append(
            tuple(
                perm[a.apply(k, [inv[y] for y in args])]
                for args in itertools.product(range(a.size), repeat=arity)
            )
        )
    return Algebra(carrier, a.sig, tuple(tables))

