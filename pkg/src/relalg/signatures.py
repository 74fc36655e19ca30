"""Relational signatures, finite quantity lattices and (lifted) algebraic signatures."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Mapping

if TYPE_CHECKING:
    from .liftings import Lifting

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$|^=:(0|1|[0-9]+/[0-9]+)$")


class SignatureError(ValueError):
    pass


def _check_unique(names: Iterable[str]) -> None:
    seen = set()
    for name in names:
        if name in seen:
            raise SignatureError(f"duplicate symbol {name!r}")
        seen.add(name)


@dataclass(frozen=True)
class RelationalSignature:
    """Ordered table of relation symbols; the order fixes canonical indexing."""

    symbols: tuple[tuple[str, int], ...] = ()
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        symbols = tuple((str(n), int(a)) for n, a in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        _check_unique(n for n, _ in symbols)
        for name, arity in symbols:
            if not _IDENT.match(name):
                raise SignatureError(f"bad relation symbol name {name!r}")
            if arity < 1:
                raise SignatureError("relational arity must be >= 1")
        object.__setattr__(self, "_index", {n: i for i, (n, _) in enumerate(symbols)})

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.symbols)

    @property
    def arities(self) -> tuple[int, ...]:
        return tuple(a for _, a in self.symbols)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SignatureError(f"unknown relation symbol {name!r}") from None

    def arity(self, name: str) -> int:
        return self.symbols[self.index(name)][1]


@dataclass(frozen=True)
class AlgebraicSignature:
    symbols: tuple[tuple[str, int], ...] = ()
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        symbols = tuple((str(n), int(a)) for n, a in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        _check_unique(n for n, _ in symbols)
        for name, arity in symbols:
            if not re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", name):
                raise SignatureError(f"bad operation symbol name {name!r}")
            if arity < 0:
                raise SignatureError("operation arity must be >= 0")
        object.__setattr__(self, "_index", {n: i for i, (n, _) in enumerate(symbols)})

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.symbols)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SignatureError(f"unknown operation symbol {name!r}") from None

    def arity(self, name: str) -> int:
        return self.symbols[self.index(name)][1]


@dataclass(frozen=True)
class LiftedSignature:
    """An algebraic signature with one lifting per operation symbol, in symbol order."""

    base: AlgebraicSignature
    liftings: tuple["Lifting", ...]

    def __post_init__(self) -> None:
        liftings = tuple(self.liftings)
        object.__setattr__(self, "liftings", liftings)
        if len(liftings) != len(self.base):
            raise SignatureError("every operation symbol needs exactly one lifting")
        for (name, arity), lifting in zip(self.base.symbols, liftings):
            lifting.check_arity(arity, name)

    @classmethod
    def build(cls, ops: Iterable[tuple[str, int, "Lifting"]]) -> "LiftedSignature":
        ops = list(ops)
        return cls(AlgebraicSignature(tuple((n, a) for n, a, _ in ops)), tuple(l for _, _, l in ops))

    def __len__(self) -> int:
        return len(self.base)

    @property
    def symbols(self) -> tuple[tuple[str, int], ...]:
        return self.base.symbols

    def lifting_of(self, name: str) -> "Lifting":
        return self.liftings[self.base.index(name)]


@dataclass(frozen=True)
class QuantityLattice:
    """A finite chain of rationals in [0,1] containing 0 and 1.

    ``add`` and ``join`` are tables over element *indices*; ``add`` realizes
    min(1, q + q') rounded up to the least element above the exact sum.
    """

    elements: tuple[Fraction, ...]
    add: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False, hash=False)
    join: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        elems = tuple(Fraction(e) for e in self.elements)
        object.__setattr__(self, "elements", elems)
        if not elems or elems[0] != 0 or elems[-1] != 1:
            raise SignatureError("quantity lattice must contain 0 and 1")
        if any(a >= b for a, b in zip(elems, elems[1:])):
            raise SignatureError("quantity lattice must be strictly ascending")
        n = len(elems)
        add = tuple(
            tuple(self.round_up(min(Fraction(1), elems[i] + elems[j])) for j in range(n))
            for i in range(n)
        )
        join = tuple(tuple(max(i, j) for j in range(n)) for i in range(n))
        object.__setattr__(self, "add", add)
        object.__setattr__(self, "join", join)

    @classmethod
    def of(cls, *values) -> "QuantityLattice":
        return cls(tuple(sorted(Fraction(v) for v in values)))

    @classmethod
    def uniform(cls, steps: int) -> "QuantityLattice":
        """The chain 0, 1/steps, ..., 1."""
        return cls(tuple(Fraction(i, steps) for i in range(steps + 1)))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def index(self, q) -> int:
        try:
            return self.elements.index(Fraction(q))
        except ValueError:
            raise SignatureError(f"{q} is not a lattice element") from None

    def round_up(self, x) -> int:
        """Index of the least element >= x."""
        x = Fraction(x)
        for i, e in enumerate(self.elements):
            if e >= x:
                return i
        raise SignatureError(f"{x} exceeds the lattice top")

    def round_down(self, x) -> int:
        """Index of the greatest element <= x."""
        x = Fraction(x)
        best = None
        for i, e in enumerate(self.elements):
            if e <= x:
                best = i
        if best is None:
            raise SignatureError(f"{x} is below the lattice bottom")
        return best


Q2 = QuantityLattice.uniform(1)
Q4 = QuantityLattice.uniform(4)


def quantity_name(q) -> str:
    return f"=:{Fraction(q)}"


def quantity_of(name: str) -> Fraction | None:
    """The quantity of a ``=:q`` symbol name, or None for other names."""
    if not name.startswith("=:"):
        return None
    try:
        return Fraction(name[2:])
    except (ValueError, ZeroDivisionError):
        return None


def make_gmet_signature(q: QuantityLattice) -> RelationalSignature:
    return RelationalSignature(tuple((quantity_name(e), 2) for e in q))


def lattice_of(sig: RelationalSignature) -> QuantityLattice:
    """Recover the quantity lattice of a signature built by make_gmet_signature."""
    qs = [quantity_of(n) for n in sig.names]
    if not qs or any(q is None for q in qs) or any(a != 2 for a in sig.arities):
        raise SignatureError("not a generalized-metric signature")
    lattice = QuantityLattice(tuple(qs))
    if make_gmet_signature(lattice) != sig:
        raise SignatureError("generalized-metric symbols must be listed in ascending order")
    return lattice


def make_poset_signature() -> RelationalSignature:
    return RelationalSignature((("leq", 2),))


def make_partial_algebra_signature(p: AlgebraicSignature) -> RelationalSignature:
    return RelationalSignature(tuple((f"alpha_{f}", a + 1) for f, a in p.symbols))
