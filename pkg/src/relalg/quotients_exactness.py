"""Quotients, c-reflexivity, compatible pairs and the exactness correspondence.

Quotient codomains are canonical: classes are numbered by their least
representative, so the quotient map table is a restricted growth string and
equal quotients are syntactically equal.

Relation families on a fixed carrier are enumerated as the closed sets of the
grounded type-1 theory (Ganter's NextClosure), then filtered by the type-2
clauses and the operation conditions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from .algebras import Algebra, AlgebraMap, factor_tables, is_valid
from .horn import AxiomSet, GroundTheory, ground, in_C
from .reports import Verdict
from .structures import (
    Structure,
    StructureMap,
    classify_map,
    encode,
    enumerate_substructures,
    first_unpreserved,
    morphisms,
)

DEFAULT_MAX_CARRIER = 4
MAX_RELATION_SYMBOLS = 6


class EnumerationBoundError(ValueError):
    pass


# ------------------------------------------------------------- partitions


def set_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length n in lexicographic order."""
    if n == 0:
        yield ()
        return

    def go(prefix: list[int], top: int) -> Iterator[tuple[int, ...]]:
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for v in range(top + 2):
            prefix.append(v)
            yield from go(prefix, max(top, v))
            prefix.pop()

    yield from go([0], 0)


def canonical_labels(table: Sequence[int]) -> tuple[int, ...]:
    """Renumber values by first occurrence."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(v, len(seen)) for v in table)


def quotient_ops(a: Algebra, classes: Sequence[int]) -> tuple[tuple[int, ...], ...] | None:
    """Operation tables on the classes, or None when the partition is not a congruence."""
    if len(classes) != a.size:
        raise ValueError("one class label per carrier element expected")
    k = max(classes, default=-1) + 1
    tables = []
    for op, (_, arity) in enumerate(a.sig.symbols):
        table: list[int | None] = [None] * (k**arity)
        for args in itertools.product(range(a.size), repeat=arity):
            code = encode([classes[x] for x in args], [k] * arity)
            v = classes[a.apply(op, args)]
            if table[code] is None:
                table[code] = v
            elif table[code] != v:
                return None
        tables.append(tuple(table))  # type: ignore[arg-type]
    return tuple(tables)


def is_congruence(a: Algebra, classes: Sequence[int]) -> bool:
    return quotient_ops(a, classes) is not None


# ---------------------------------------------------------- closed families


def _next_closure(mask: int, slots: int, close) -> int | None:
    for i in reversed(range(slots)):
        bit = 1 << i
        if mask & bit:
            mask &= ~bit
        else:
            b = close(mask | bit)
            if (b & ~mask) & (bit - 1) == 0:
                return b
    return None


@lru_cache(maxsize=512)
def closed_families(ax: AxiomSet, size: int, forced: int = 0) -> tuple[int, ...]:
    """All relation-family masks on ``size`` points that are closed under the
    type-1 clauses of ``ax`` and contain ``forced``."""
    g = ground(ax.type1(), size)

    def close(m: int) -> int:
        return g.close(m | forced)

    out = []
    m: int | None = close(0)
    while m is not None:
        out.append(m)
        m = _next_closure(m, g.slots, close)
    return tuple(out)


def structures_in_C(ax: AxiomSet, size: int) -> list[Structure]:
    """Every structure on ``size`` points satisfying ``ax``, in lectic order."""
    g = ground(ax, size)
    return [g.structure_of(m) for m in closed_families(ax, size) if g.eq_violation(m) is None]


# ---------------------------------------------------------------- quotients


@dataclass(frozen=True)
class Quotient:
    src: Algebra
    table: tuple[int, ...]
    cod: Algebra

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", tuple(self.table))
        if canonical_labels(self.table) != self.table:
            raise ValueError("quotient table must number classes by least representative")
        if len(set(self.table)) != self.cod.size:
            raise ValueError("quotient map must be surjective")

    @property
    def map(self) -> AlgebraMap:
        return AlgebraMap(self.src, self.cod, self.table)

    @property
    def structure_map(self) -> StructureMap:
        return StructureMap(self.src.carrier, self.cod.carrier, self.table)


def _check_bounds(a: Algebra, max_carrier: int) -> None:
    if a.size > max_carrier:
        raise EnumerationBoundError(f"carrier of size {a.size} exceeds the bound {max_carrier}")
    if len(a.rsig) > MAX_RELATION_SYMBOLS:
        raise EnumerationBoundError(f"more than {MAX_RELATION_SYMBOLS} relation symbols")


def enumerate_quotients(a: Algebra, ax: AxiomSet, max_carrier: int = DEFAULT_MAX_CARRIER) -> list[Quotient]:
    """All C-quotients of ``a`` in canonical form, listed along a linear extension
    of the quotient order."""
    _check_bounds(a, max_carrier)
    out = []
    for classes in set_partitions(a.size):
        ops = quotient_ops(a, classes)
        if ops is None:
            continue
        k = max(classes, default=-1) + 1
        g = ground(ax, k)
        forced = 0
        for r_idx, r in enumerate(a.carrier.rels):
            for t in r:
                forced |= g.bit(r_idx, [classes[x] for x in t])
        for mask in closed_families(ax, k, forced):
            if g.eq_violation(mask) is not None:
                continue
            cod = Algebra(g.structure_of(mask), a.sig, ops)
            if is_valid(cod):
                out.append(Quotient(a, classes, cod))
    return sorted(out, key=lambda q: _pair_weight(pair_from_quotient(q)))


def quotient_leq(q1: Quotient, q2: Quotient) -> bool:
    """q1 <= q2 iff q2 factors through q1 by an algebra morphism."""
    g, _, _ = factor_tables(q1.table, q1.cod.carrier, q2.table, q2.cod.carrier)
    return g is not None


def _pair_weight(p: "CompatiblePair") -> tuple:
    kernel = sum(1 for x in p.congruence for y in p.congruence if x == y)
    return (sum(len(r) for r in p.refined.rels) + kernel, p.congruence, tuple(sorted(r) for r in p.refined.rels))


# ------------------------------------------------------------- c-reflexivity


def _section(e: StructureMap, subset: Sequence[int]) -> tuple[int, ...] | None:
    """Preimages s(b) for b in ``subset`` on which e restricts to an isomorphism."""
    a, b = e.dom, e.cod
    pre: dict[int, list[int]] = {y: [] for y in subset}
    for x, y in enumerate(e.table):
        if y in pre:
            pre[y].append(x)
    sub = list(subset)
    checks: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in sub]
    for k, (_, arity) in enumerate(b.sig.symbols):
        for idx in itertools.product(range(len(sub)), repeat=arity):
            checks[max(idx)].append((k, idx))
    chosen = [0] * len(sub)

    def go(i: int) -> bool:
        if i == len(sub):
            return True
        for x in pre[sub[i]]:
            chosen[i] = x
            ok = True
            for k, idx in checks[i]:
                in_b = tuple(sub[j] for j in idx) in b.rels[k]
                in_a = tuple(chosen[j] for j in idx) in a.rels[k]
                if in_a != in_b:
                    ok = False
                    break
            if ok and go(i + 1):
                return True
        return False

    return tuple(chosen) if go(0) else None


def _as_structure_map(e) -> StructureMap:
    return e.structure_map if isinstance(e, Quotient) else e


def is_c_reflexive(e, c: int | None) -> Verdict:
    """c-reflexivity of a surjection (a Quotient or a StructureMap); c=None is infinity.

    The witness is the first codomain subset of size < c that does not lift.
    """
    f = _as_structure_map(e)
    if not classify_map(f).surjective:
        raise ValueError("c-reflexivity is defined for surjections")
    top = f.cod.size if c is None else min(c - 1, f.cod.size)
    for k in range(top + 1):
        for subset in itertools.combinations(range(f.cod.size), k):
            if _section(f, subset) is None:
                return Verdict(False, witness=subset)
    return Verdict(True)


def embedding_section(e) -> tuple[int, ...] | None:
    """A map s with e.s = id that is an embedding, if one exists."""
    f = _as_structure_map(e)
    return _section(f, range(f.cod.size))


def is_projective(x: Structure, e: StructureMap) -> bool:
    """Every morphism x -> cod(e) lifts along e to a morphism x -> dom(e)."""
    lifted = {tuple(e.table[v] for v in g.table) for g in morphisms(x, e.dom)}
    return all(h.table in lifted for h in morphisms(x, e.cod))


def check_EX_characterization(e, c: int, size_bound: int, ax: AxiomSet | None = None) -> Verdict:
    """Compare c-reflexivity with projectivity of small structures.

    The test objects are all substructures of the codomain with < c elements,
    plus (when ``ax`` is given) every structure in C with < c and at most
    ``size_bound`` elements.  Passes when both sides agree; the witness records
    both answers and the first non-projective object.
    """
    f = _as_structure_map(e)
    lhs = bool(is_c_reflexive(f, c))
    objects = [sub for _, sub in enumerate_substructures(f.cod, c - 1)]
    if ax is not None:
        for n in range(min(c - 1, size_bound) + 1):
            objects.extend(structures_in_C(ax, n))
    failing = next((x for x in objects if not is_projective(x, f)), None)
    rhs = failing is None
    return Verdict(lhs == rhs, witness={"reflexive": lhs, "projective": rhs, "counterexample": failing})


# ----------------------------------------------------------- compatible pairs


@dataclass(frozen=True)
class CompatiblePair:
    base: Algebra
    refined: Structure
    congruence: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "congruence", canonical_labels(self.congruence))
        if self.refined.size != self.base.size or self.refined.sig != self.base.rsig:
            raise ValueError("refined structure must live on the algebra's carrier")


def pair_leq(p1: CompatiblePair, p2: CompatiblePair) -> bool:
    if any(not r1 <= r2 for r1, r2 in zip(p1.refined.rels, p2.refined.rels)):
        return False
    n = len(p1.congruence)
    return all(
        p2.congruence[x] == p2.congruence[y]
        for x in range(n)
        for y in range(n)
        if p1.congruence[x] == p1.congruence[y]
    )


def _refining_ops_ok(a: Algebra, refined: Structure) -> tuple[str, str, tuple] | None:
    for k, ((name, arity), lifting) in enumerate(zip(a.sig.symbols, a.sig.liftings)):
        lifted = lifting.apply(refined, arity)
        bad = first_unpreserved(StructureMap(lifted, refined, a.ops[k]))
        if bad is not None:
            return name, bad[0], bad[1]
    return None


def _saturation_violation(refined: Structure, classes: Sequence[int]) -> tuple[str, tuple] | None:
    n = refined.size
    for name, r, (_, arity) in zip(refined.sig.names, refined.rels, refined.sig.symbols):
        for t in sorted(r):
            for u in itertools.product(range(n), repeat=arity):
                if all(classes[x] == classes[y] for x, y in zip(t, u)) and u not in r:
                    return name, u
    return None


def _compat_b_violation(g: GroundTheory, mask: int, classes: Sequence[int]) -> tuple[int, int] | None:
    for pm, x, y in g.eq_rules:
        if mask & pm == pm and classes[x] != classes[y]:
            return x, y
    return None


def validate_pair(p: CompatiblePair, ax: AxiomSet) -> Verdict:
    """Check every defining condition; the reason names the first violated one."""
    a, r, classes = p.base, p.refined, p.congruence
    v = in_C(r, ax.type1())
    if not v:
        return Verdict(False, witness=v.witness, reason="refining(a)")
    for name, base_r, ref_r in zip(a.rsig.names, a.carrier.rels, r.rels):
        if not base_r <= ref_r:
            return Verdict(False, witness=(name, min(base_r - ref_r)), reason="refining(b)")
    bad = _refining_ops_ok(a, r)
    if bad is not None:
        return Verdict(False, witness=bad, reason="refining(c)")
    if quotient_ops(a, classes) is None:
        return Verdict(False, witness=classes, reason="congruence")
    sat = _saturation_violation(r, classes)
    if sat is not None:
        return Verdict(False, witness=sat, reason="compat(a)")
    g = ground(ax, a.size)
    bad_eq = _compat_b_violation(g, g.mask_of(r), classes)
    if bad_eq is not None:
        return Verdict(False, witness=bad_eq, reason="compat(b)")
    return Verdict(True)


def pair_from_quotient(q: Quotient) -> CompatiblePair:
    a, e, b = q.src, q.table, q.cod.carrier
    rels = []
    for r, (_, arity) in zip(b.rels, b.sig.symbols):
        rels.append(
            frozenset(t for t in itertools.product(range(a.size), repeat=arity) if tuple(e[x] for x in t) in r)
        )
    return CompatiblePair(a, a.carrier.with_rels(rels), q.table)


def quotient_from_pair(p: CompatiblePair, ax: AxiomSet | None = None) -> Quotient:
    if ax is not None:
        v = validate_pair(p, ax)
        if not v:
            raise ValueError(f"invalid compatible pair: {v.reason} at {v.witness}")
    classes = p.congruence
    ops = quotient_ops(p.base, classes)
    if ops is None:
        raise ValueError("the pair's relation is not a congruence")
    k = max(classes, default=-1) + 1
    rels = [frozenset(tuple(classes[x] for x in t) for t in r) for r in p.refined.rels]
    cod = Algebra(Structure(p.base.rsig, k, tuple(rels)), p.base.sig, ops)
    return Quotient(p.base, classes, cod)


def enumerate_compatible_pairs(
    a: Algebra, ax: AxiomSet, max_carrier: int = DEFAULT_MAX_CARRIER
) -> list[CompatiblePair]:
    _check_bounds(a, max_carrier)
    g = ground(ax, a.size)
    refinings = []
    for mask in closed_families(ax, a.size, g.mask_of(a.carrier)):
        refined = g.structure_of(mask)
        if _refining_ops_ok(a, refined) is None:
            refinings.append((mask, refined))
    congruences = [c for c in set_partitions(a.size) if is_congruence(a, c)]
    out = []
    for classes in congruences:
        for mask, refined in refinings:
            if _saturation_violation(refined, classes) is None and _compat_b_violation(g, mask, classes) is None:
                out.append(CompatiblePair(a, refined, classes))
    return sorted(out, key=_pair_weight)


@dataclass(frozen=True)
class ExactnessReport:
    quotients: int
    pairs: int
    bijective: bool
    order_preserving: bool
    mismatches: tuple = ()

    @property
    def ok(self) -> bool:
        return self.quotients == self.pairs and self.bijective and self.order_preserving

    def __bool__(self) -> bool:
        return self.ok


def check_exactness(a: Algebra, ax: AxiomSet, max_carrier: int = DEFAULT_MAX_CARRIER) -> ExactnessReport:
    """Compare the lattice of C-quotients with the lattice of compatible pairs."""
    qs = enumerate_quotients(a, ax, max_carrier)
    ps = enumerate_compatible_pairs(a, ax, max_carrier)
    mismatches = []
    to_pairs = [pair_from_quotient(q) for q in qs]
    pair_set = set(ps)
    for q, p in zip(qs, to_pairs):
        if p not in pair_set:
            mismatches.append(("quotient without pair", q.table))
        elif quotient_from_pair(p) != q:
            mismatches.append(("round trip", q.table))
    quot_set = set(qs)
    for p in ps:
        q = quotient_from_pair(p)
        if q not in quot_set:
            mismatches.append(("pair without quotient", p.congruence))
        elif pair_from_quotient(q) != p:
            mismatches.append(("round trip", p.congruence))
    order_ok = True
    for (q1, p1), (q2, p2) in itertools.product(zip(qs, to_pairs), repeat=2):
        if quotient_leq(q1, q2) != pair_leq(p1, p2):
            order_ok = False
            mismatches.append(("order", q1.table, q2.table))
            break
    bijective = not [m for m in mismatches if m[0] != "order"] and len(set(to_pairs)) == len(qs)
    return ExactnessReport(len(qs), len(ps), bijective, order_ok, tuple(mismatches))
