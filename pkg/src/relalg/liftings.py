"""Liftings of the n-th power functor from sets to S-structures.

A lifting sends a structure A to a structure on A^n, using the same
lexicographic tuple encoding as :func:`relalg.structures.product`.  On maps
it acts by the plain n-th power of the table.

The Lipschitz and Lukaszyk-Karmowski liftings are implemented in saturated
form ("distance at most e") so they stay inside the finite quantity chain;
over (Up)-closed structures this agrees with the pointwise definitions.

The lexicographic lifting is not functorial on non-injective maps: if
f(a) = f(a'), a pair ordered by its first coordinate can lose its order
after mapping.  It does preserve embeddings and E<-> maps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .reports import Verdict
from .signatures import SignatureError, lattice_of
from .structures import Structure, StructureMap, classify_map, decode, encode, product

KINDS = ("discrete", "product", "subset", "lex", "lipschitz", "lk")


class LiftingError(ValueError):
    pass


@dataclass(frozen=True)
class Lifting:
    kind: str
    coords: frozenset[int] | None = None
    order: str | None = None
    alpha: Fraction | None = None
    p: Fraction | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise LiftingError(f"unknown lifting kind {self.kind!r}")
        if self.kind == "subset":
            if self.coords is None:
                raise LiftingError("subset lifting needs a coordinate set")
            object.__setattr__(self, "coords", frozenset(self.coords))
        if self.kind == "lex" and not self.order:
            raise LiftingError("lexicographic lifting needs an order symbol")
        if self.kind == "lipschitz":
            if self.alpha is None or Fraction(self.alpha) < 1:
                raise LiftingError("Lipschitz constant must be >= 1")
            object.__setattr__(self, "alpha", Fraction(self.alpha))
        if self.kind == "lk":
            if self.p is None or not 0 < Fraction(self.p) < 1:
                raise LiftingError("LK parameter must lie strictly between 0 and 1")
            object.__setattr__(self, "p", Fraction(self.p))

    def check_arity(self, n: int, name: str = "?") -> None:
        if self.kind == "lk" and n != 2:
            raise LiftingError(f"{name}: the LK lifting applies to binary symbols only")
        if self.kind == "subset" and any(not 0 <= i < n for i in self.coords):
            raise LiftingError(f"{name}: subset coordinates must be < {n}")

    def apply(self, a: Structure, n: int) -> Structure:
        return apply_lifting(self, a, n)

    def __str__(self) -> str:
        if self.kind == "subset":
            return "subset{" + ",".join(map(str, sorted(self.coords))) + "}"
        if self.kind == "lex":
            return f"lex({self.order})"
        if self.kind == "lipschitz":
            return f"lipschitz({self.alpha})"
        if self.kind == "lk":
            return f"lk({self.p})"
        return self.kind


def discrete() -> Lifting:
    return Lifting("discrete")


def product_lifting() -> Lifting:
    return Lifting("product")


def subset(coords: Iterable[int]) -> Lifting:
    return Lifting("subset", coords=frozenset(coords))


def lex(order: str = "leq") -> Lifting:
    return Lifting("lex", order=order)


def lipschitz(alpha) -> Lifting:
    return Lifting("lipschitz", alpha=Fraction(alpha))


def lk(p) -> Lifting:
    return Lifting("lk", p=Fraction(p))


@lru_cache(maxsize=4096)
def apply_lifting(spec: Lifting, a: Structure, n: int) -> Structure:
    spec.check_arity(n)
    kind = spec.kind
    if kind == "discrete":
        return Structure.discrete(a.sig, a.size**n)
    if kind == "product":
        return product([a] * n, sig=a.sig)[0]
    if kind == "subset":
        return _subset(a, n, spec.coords)
    if kind == "lex":
        return _lex(a, n, spec.order)
    if kind == "lipschitz":
        return _lipschitz(a, n, spec.alpha)
    return _lk(a, spec.p)


def _subset(a: Structure, n: int, coords: frozenset[int]) -> Structure:
    sizes = [a.size] * n
    cs = sorted(coords)
    rels = []
    for r, (_, arity) in zip(a.rels, a.sig.symbols):
        out = set()
        # choose the S-coordinates from related tuples, the rest freely
        free = [i for i in range(n) if i not in coords]
        for choice in itertools.product(sorted(r), repeat=len(cs)):
            for rest in itertools.product(range(a.size), repeat=len(free) * arity):
                cols = {}
                for i, t in zip(cs, choice):
                    cols[i] = t
                for j, i in enumerate(free):
                    cols[i] = rest[j * arity : (j + 1) * arity]
                out.add(tuple(encode([cols[i][m] for i in range(n)], sizes) for m in range(arity)))
        rels.append(frozenset(out))
    return Structure(a.sig, a.size**n, tuple(rels))


def _lex(a: Structure, n: int, order: str) -> Structure:
    if order not in a.sig or a.sig.arity(order) != 2:
        raise LiftingError(f"lexicographic lifting needs a binary symbol {order!r}")
    k = a.sig.index(order)
    leq = a.rels[k]
    sizes = [a.size] * n
    size = a.size**n
    out = set()
    elements = [decode(x, sizes) for x in range(size)]
    for x, u in enumerate(elements):
        for y, v in enumerate(elements):
            diff = next((i for i in range(n) if u[i] != v[i]), None)
            if diff is None or (u[diff], v[diff]) in leq:
                out.add((x, y))
    rels = [frozenset() for _ in a.sig.symbols]
    rels[k] = frozenset(out)
    return Structure(a.sig, size, tuple(rels))


def _least_levels(a: Structure) -> tuple[list[Fraction], list[list[int | None]]]:
    """Quantities of the chain and, per pair, the least index e with x =:e y."""
    q = lattice_of(a.sig)
    least: list[list[int | None]] = [[None] * a.size for _ in range(a.size)]
    for i in reversed(range(len(q))):
        for x, y in a.rels[i]:
            least[x][y] = i
    return list(q.elements), least


def _lipschitz(a: Structure, n: int, alpha: Fraction) -> Structure:
    elems, least = _least_levels(a)
    sizes = [a.size] * n
    size = a.size**n
    tuples = [decode(x, sizes) for x in range(size)]
    rels = []
    for eps in elems:
        out = set()
        for x, u in enumerate(tuples):
            for y, v in enumerate(tuples):
                if all(least[u[i]][v[i]] is not None and elems[least[u[i]][v[i]]] * alpha <= eps for i in range(n)):
                    out.add((x, y))
        rels.append(frozenset(out))
    return Structure(a.sig, size, tuple(rels))


def _lk(a: Structure, p: Fraction) -> Structure:
    elems, least = _least_levels(a)
    weights = {(0, 0): p * p, (0, 1): p * (1 - p), (1, 0): (1 - p) * p, (1, 1): (1 - p) * (1 - p)}
    sizes = [a.size, a.size]
    size = a.size**2
    tuples = [decode(x, sizes) for x in range(size)]
    best: dict[tuple[int, int], Fraction | None] = {}
    for x, u in enumerate(tuples):
        for y, v in enumerate(tuples):
            total = Fraction(0)
            for (i, j), w in weights.items():
                lvl = least[u[i]][v[j]]
                if lvl is None:
                    total = None
                    break
                total += w * elems[lvl]
            best[x, y] = total
    rels = [
        frozenset(xy for xy, total in best.items() if total is not None and total <= eps) for eps in elems
    ]
    return Structure(a.sig, size, tuple(rels))


def lift_map(spec: Lifting, f: StructureMap, n: int) -> StructureMap:
    """The lifted map f^n between the lifted structures."""
    dom = spec.apply(f.dom, n)
    cod = spec.apply(f.cod, n)
    dsz, csz = [f.dom.size] * n, [f.cod.size] * n
    table = tuple(encode([f.table[x] for x in decode(u, dsz)], csz) for u in range(dom.size))
    return StructureMap(dom, cod, table)


def check_preserves_embeddings(spec: Lifting, samples: Sequence[StructureMap], n: int = 2) -> Verdict:
    """Every sample embedding must lift to an embedding; failures name the sample index."""
    failures = []
    for i, m in enumerate(samples):
        if not classify_map(m).is_embedding:
            raise LiftingError(f"sample {i} is not an embedding")
        if not classify_map(lift_map(spec, m, n)).is_embedding:
            failures.append(i)
    return Verdict(not failures, witness=failures[0] if failures else None, failures=tuple(failures))


def check_preserves_erefl(spec: Lifting, samples: Sequence[StructureMap], n: int = 2) -> Verdict:
    failures = []
    for i, e in enumerate(samples):
        if not classify_map(e).is_erefl:
            raise LiftingError(f"sample {i} is not a surjective preserve-and-reflect map")
        if not classify_map(lift_map(spec, e, n)).is_erefl:
            failures.append(i)
    return Verdict(not failures, witness=failures[0] if failures else None, failures=tuple(failures))


def applicable(spec: Lifting, a: Structure, n: int) -> bool:
    try:
        spec.check_arity(n)
        if spec.kind in ("lipschitz", "lk"):
            lattice_of(a.sig)
        if spec.kind == "lex":
            return spec.order in a.sig and a.sig.arity(spec.order) == 2
    except (LiftingError, SignatureError):
        return False
    return True


check_preserves_Erefl = check_preserves_erefl
