"""Finite S-structures and the maps between them.

Carriers are index ranges ``0..size-1``.  Tuples over a product carrier use
the lexicographic encoding of :func:`encode` (first factor most significant),
which is shared with the liftings.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .signatures import RelationalSignature, SignatureError

Tuple = tuple[int, ...]


class StructureError(ValueError):
    pass


def encode(digits: Sequence[int], sizes: Sequence[int]) -> int:
    index = 0
    for d, s in zip(digits, sizes):
        index = index * s + d
    return index


def decode(index: int, sizes: Sequence[int]) -> Tuple:
    digits = []
    for s in reversed(sizes):
        index, d = divmod(index, s)
        digits.append(d)
    return tuple(reversed(digits))


@dataclass(frozen=True)
class Structure:
    sig: RelationalSignature
    size: int
    rels: tuple[frozenset[Tuple], ...]

    def __post_init__(self) -> None:
        rels = tuple(frozenset(tuple(t) for t in r) for r in self.rels)
        object.__setattr__(self, "rels", rels)
        if self.size < 0:
            raise StructureError("negative carrier size")
        if len(rels) != len(self.sig):
            raise StructureError("one relation per symbol expected")
        for (name, arity), r in zip(self.sig.symbols, rels):
            for t in r:
                if len(t) != arity:
                    raise StructureError(f"{name}: tuple {t} has wrong length")
                if any(not 0 <= x < self.size for x in t):
                    raise StructureError(f"{name}: tuple {t} out of range")

    @classmethod
    def build(
        cls, sig: RelationalSignature, size: int, rels: Mapping[str, Iterable[Sequence[int]]] | None = None
    ) -> "Structure":
        rels = rels or {}
        for name in rels:
            sig.index(name)
        return cls(sig, size, tuple(frozenset(map(tuple, rels.get(n, ()))) for n in sig.names))

    @classmethod
    def discrete(cls, sig: RelationalSignature, size: int) -> "Structure":
        return cls(sig, size, tuple(frozenset() for _ in sig.symbols))

    def rel(self, name: str) -> frozenset[Tuple]:
        return self.rels[self.sig.index(name)]

    def holds(self, name: str, *args: int) -> bool:
        return tuple(args) in self.rel(name)

    def sorted_rel(self, name: str) -> list[Tuple]:
        return sorted(self.rel(name))

    def with_rels(self, rels: Sequence[Iterable[Tuple]]) -> "Structure":
        return Structure(self.sig, self.size, tuple(frozenset(r) for r in rels))

    def __repr__(self) -> str:
        body = ", ".join(f"{n}={sorted(r)}" for n, r in zip(self.sig.names, self.rels))
        return f"Structure(size={self.size}, {body})"


@dataclass(frozen=True)
class StructureMap:
    dom: Structure
    cod: Structure
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", tuple(self.table))
        if self.dom.sig != self.cod.sig:
            raise SignatureError("domain and codomain signatures differ")
        if len(self.table) != self.dom.size:
            raise StructureError("map table must be total on the domain")
        if any(not 0 <= y < self.cod.size for y in self.table):
            raise StructureError("map table leaves the codomain")

    def __call__(self, x: int) -> int:
        return self.table[x]

    def apply(self, t: Sequence[int]) -> Tuple:
        return tuple(self.table[x] for x in t)


@dataclass(frozen=True)
class MorphismClass:
    preserves: bool
    reflects: bool
    injective: bool
    surjective: bool

    @property
    def is_morphism(self) -> bool:
        return self.preserves

    @property
    def is_embedding(self) -> bool:
        return self.injective and self.preserves and self.reflects

    @property
    def is_erefl(self) -> bool:
        """Surjective, preserving and reflecting (the class E<->)."""
        return self.surjective and self.preserves and self.reflects

    @property
    def is_iso(self) -> bool:
        return self.is_embedding and self.surjective


def identity(a: Structure) -> StructureMap:
    return StructureMap(a, a, tuple(range(a.size)))


def compose(g: StructureMap, f: StructureMap) -> StructureMap:
    """g after f."""
    if f.cod != g.dom:
        raise StructureError("maps are not composable")
    return StructureMap(f.dom, g.cod, tuple(g.table[y] for y in f.table))


def preserves(f: StructureMap) -> bool:
    return first_unpreserved(f) is None


def first_unpreserved(f: StructureMap) -> tuple[str, Tuple] | None:
    for name, r, s in zip(f.dom.sig.names, f.dom.rels, f.cod.rels):
        for t in sorted(r):
            if f.apply(t) not in s:
                return name, t
    return None


def first_unreflected(f: StructureMap) -> tuple[str, Tuple] | None:
    """A domain tuple outside R_A whose image lies in R_B, if any."""
    pre: list[list[int]] = [[] for _ in range(f.cod.size)]
    for x, y in enumerate(f.table):
        pre[y].append(x)
    for name, r, s in zip(f.dom.sig.names, f.dom.rels, f.cod.rels):
        for t in sorted(s):
            for u in itertools.product(*(pre[y] for y in t)):
                if u not in r:
                    return name, u
    return None


def classify_map(f: StructureMap) -> MorphismClass:
    if f.dom.sig != f.cod.sig:
        raise SignatureError("domain and codomain signatures differ")
    image = set(f.table)
    return MorphismClass(
        preserves=first_unpreserved(f) is None,
        reflects=first_unreflected(f) is None,
        injective=len(image) == f.dom.size,
        surjective=len(image) == f.cod.size,
    )


def product(
    factors: Sequence[Structure], sig: RelationalSignature | None = None
) -> tuple[Structure, list[StructureMap]]:
    """Cartesian product with lexicographic index encoding, plus projections.

    ``sig`` is required only for the empty product.
    """
    factors = list(factors)
    if factors:
        sig = factors[0].sig
        if any(f.sig != sig for f in factors):
            raise SignatureError("factors must share a signature")
    elif sig is None:
        raise StructureError("the empty product needs an explicit signature")
    sizes = [f.size for f in factors]
    size = 1
    for s in sizes:
        size *= s
    rels = []
    for k, (_, arity) in enumerate(sig.symbols):
        out = set()
        for choice in itertools.product(*(sorted(f.rels[k]) for f in factors)):
            out.add(tuple(encode([t[j] for t in choice], sizes) for j in range(arity)))
        rels.append(frozenset(out))
    p = Structure(sig, size, tuple(rels))
    elements = [decode(x, sizes) for x in range(size)]
    projections = [StructureMap(p, f, tuple(e[i] for e in elements)) for i, f in enumerate(factors)]
    return p, projections


def coproduct(
    summands: Sequence[Structure], sig: RelationalSignature | None = None
) -> tuple[Structure, list[StructureMap]]:
    summands = list(summands)
    if summands:
        sig = summands[0].sig
        if any(s.sig != sig for s in summands):
            raise SignatureError("summands must share a signature")
    elif sig is None:
        raise StructureError("the empty coproduct needs an explicit signature")
    offsets = list(itertools.accumulate([0] + [s.size for s in summands]))
    rels = []
    for k in range(len(sig)):
        out = set()
        for off, s in zip(offsets, summands):
            out.update(tuple(x + off for x in t) for t in s.rels[k])
        rels.append(frozenset(out))
    c = Structure(sig, offsets[-1], tuple(rels))
    injections = [
        StructureMap(s, c, tuple(range(off, off + s.size))) for off, s in zip(offsets, summands)
    ]
    return c, injections


def induced(a: Structure, subset: Iterable[int]) -> tuple[Structure, tuple[int, ...]]:
    """Induced structure on ``subset`` and the ascending list of kept indices."""
    keep = tuple(sorted(set(subset)))
    if any(not 0 <= x < a.size for x in keep):
        raise StructureError("subset index out of range")
    pos = {x: i for i, x in enumerate(keep)}
    rels = tuple(
        frozenset(tuple(pos[x] for x in t) for t in r if all(x in pos for x in t)) for r in a.rels
    )
    return Structure(a.sig, len(keep), rels), keep


def substructure(a: Structure, subset: Iterable[int]) -> tuple[Structure, StructureMap]:
    sub, keep = induced(a, subset)
    return sub, StructureMap(sub, a, keep)


def image_factorize(f: StructureMap) -> tuple[StructureMap, StructureMap]:
    """Split a morphism into a surjection onto its image followed by the inclusion."""
    bad = first_unpreserved(f)
    if bad is not None:
        raise StructureError(f"map does not preserve {bad[0]} at {bad[1]}")
    middle, embed = substructure(f.cod, f.table)
    pos = {y: i for i, y in enumerate(embed.table)}
    surj = StructureMap(f.dom, middle, tuple(pos[y] for y in f.table))
    return surj, embed


def enumerate_substructures(
    a: Structure, max_size: int | None = None
) -> Iterator[tuple[tuple[int, ...], Structure]]:
    """All subsets of the carrier up to ``max_size`` (None = unbounded) with induced structure."""
    top = a.size if max_size is None else min(max_size, a.size)
    for k in range(top + 1):
        for subset in itertools.combinations(range(a.size), k):
            sub, _ = induced(a, subset)
            yield subset, sub


def all_maps(dom: Structure, cod: Structure) -> Iterator[StructureMap]:
    for table in itertools.product(range(cod.size), repeat=dom.size):
        yield StructureMap(dom, cod, table)


def morphisms(dom: Structure, cod: Structure) -> Iterator[StructureMap]:
    """All relation-preserving maps, by backtracking over the domain in index order."""
    checks: list[list[tuple[int, Tuple]]] = [[] for _ in range(dom.size)]
    for k, r in enumerate(dom.rels):
        for t in r:
            checks[max(t)].append((k, t))
    table = [0] * dom.size

    def go(x: int) -> Iterator[StructureMap]:
        if x == dom.size:
            yield StructureMap(dom, cod, tuple(table))
            return
        for y in range(cod.size):
            table[x] = y
            if all(tuple(table[v] for v in t) in cod.rels[k] for k, t in checks[x]):
                yield from go(x + 1)

    yield from go(0)


def is_isomorphic(a: Structure, b: Structure) -> bool:
    if a.sig != b.sig or a.size != b.size:
        return False
    if any(len(r) != len(s) for r, s in zip(a.rels, b.rels)):
        return False
    for perm in itertools.permutations(range(b.size)):
        if all(frozenset(tuple(perm[x] for x in t) for t in r) == s for r, s in zip(a.rels, b.rels)):
            return True
    return False


def relabel(a: Structure, perm: Sequence[int]) -> Structure:
    """The isomorphic copy of ``a`` along the bijection ``x -> perm[x]``."""
    return a.with_rels([{tuple(perm[x] for x in t) for t in r} for r in a.rels])
