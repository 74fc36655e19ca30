"""Depth-bounded slices of free algebras over a structure.

The slice of depth d holds every term of depth <= d; its relations are those
of stage d of the free-algebra chain X, HX + X, H(HX + X) + X, ...  A term
tuple is related iff all entries are variables related in X, or all are
applications of the same symbol whose argument matrix is related in the
lifting of the previous stage.

Terms are ordered by depth, then head symbol index, then arguments, so the
depth-(d-1) slice is a prefix of the depth-d slice.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence, Union

from .algebras import Algebra
from .signatures import AlgebraicSignature, LiftedSignature
from .structures import Structure, StructureMap, decode, first_unpreserved, induced


@dataclass(frozen=True)
class Var:
    index: int

    @property
    def depth(self) -> int:
        return 0


@dataclass(frozen=True)
class App:
    op: str
    args: tuple["Term", ...] = ()
    depth: int = field(default=0, init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        args = tuple(self.args)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "depth", 1 + max((t.depth for t in args), default=0))


Term = Union[Var, App]


def variables_of(t: Term) -> set[int]:
    if isinstance(t, Var):
        return {t.index}
    out: set[int] = set()
    for s in t.args:
        out |= variables_of(s)
    return out


def format_term(t: Term, names: Sequence[str]) -> str:
    if isinstance(t, Var):
        return names[t.index]
    if not t.args:
        return t.op
    return f"{t.op}({', '.join(format_term(s, names) for s in t.args)})"


def check_term(t: Term, sig: AlgebraicSignature, nvars: int) -> None:
    if isinstance(t, Var):
        if not 0 <= t.index < nvars:
            raise ValueError(f"variable index {t.index} out of range")
        return
    if sig.arity(t.op) != len(t.args):
        raise ValueError(f"{t.op} expects {sig.arity(t.op)} arguments")
    for s in t.args:
        check_term(s, sig, nvars)


def term_count(nvars: int, sig: AlgebraicSignature, depth: int) -> int:
    """t_0 = |X|, t_{k+1} = |X| + sum over symbols of t_k ** arity."""
    t = nvars
    for _ in range(depth):
        t = nvars + sum(t**a for _, a in sig.symbols)
    return t


@dataclass(frozen=True)
class FreeAlgebraSlice:
    base: Structure
    sig: LiftedSignature
    depth: int
    terms: tuple[Term, ...]
    structure: Structure
    index: dict = field(compare=False, hash=False, repr=False)
    stage_sizes: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.terms)

    def restrict(self, depth: int) -> Structure:
        """The depth-``depth`` stage read off as the prefix of this slice."""
        return induced(self.structure, range(self.stage_sizes[depth]))[0]


def build_free_slice(x: Structure, lsig: LiftedSignature, depth: int) -> FreeAlgebraSlice:
    if depth < 0:
        raise ValueError("depth must be >= 0")
    terms: list[Term] = [Var(i) for i in range(x.size)]
    index: dict[Term, int] = {t: i for i, t in enumerate(terms)}
    stage = x
    sizes = [x.size]
    for _ in range(depth):
        prev = list(terms)
        new: list[tuple[tuple, Term]] = []
        lifted_rels = []
        for k, ((op, arity), lifting) in enumerate(zip(lsig.symbols, lsig.liftings)):
            lifted = lifting.apply(stage, arity)
            shape = [len(prev)] * arity
            for code in range(len(prev) ** arity):
                args = decode(code, shape)
                t = App(op, tuple(prev[i] for i in args))
                if t not in index:
                    new.append(((t.depth, k, args), t))
            lifted_rels.append((op, arity, shape, lifted))
        new.sort(key=lambda kt: kt[0])
        for _, t in new:
            index[t] = len(terms)
            terms.append(t)
        rels = [set(r) for r in x.rels]
        for op, arity, shape, lifted in lifted_rels:
            app_index = [
                index[App(op, tuple(prev[i] for i in decode(code, shape)))] for code in range(lifted.size)
            ]
            for rs, r in zip(rels, lifted.rels):
                rs.update(tuple(app_index[u] for u in t) for t in r)
        stage = Structure(x.sig, len(terms), tuple(frozenset(r) for r in rels))
        sizes.append(len(terms))
    return FreeAlgebraSlice(x, lsig, depth, tuple(terms), stage, index, tuple(sizes))


def canonical_injection(s: FreeAlgebraSlice) -> StructureMap:
    return StructureMap(s.base, s.structure, tuple(s.index[Var(i)] for i in range(s.base.size)))


def extend(h: Sequence[int], a: Algebra) -> Callable[[Term], int]:
    """The evaluation h# of terms in ``a`` under the variable assignment ``h``."""
    h = tuple(h)
    memo: dict[Term, int] = {}
    ops = {name: k for k, (name, _) in enumerate(a.sig.symbols)}

    def ev(t: Term) -> int:
        if isinstance(t, Var):
            return h[t.index]
        got = memo.get(t)
        if got is None:
            got = a.apply(ops[t.op], [ev(s) for s in t.args])
            memo[t] = got
        return got

    return ev


def extension_table(h: Sequence[int], a: Algebra, s: FreeAlgebraSlice) -> tuple[int, ...]:
    ev = extend(h, a)
    return tuple(ev(t) for t in s.terms)


def extend_is_morphism(h: Sequence[int], a: Algebra, s: FreeAlgebraSlice) -> bool:
    """Whether h# restricted to the slice preserves the chain-induced relations."""
    f = StructureMap(s.structure, a.carrier, extension_table(h, a, s))
    return first_unpreserved(f) is None


def terms_up_to(nvars: int, sig: AlgebraicSignature, depth: int) -> Iterator[Term]:
    """Plain enumeration of the terms of depth <= ``depth`` (no relations)."""
    level: list[Term] = [Var(i) for i in range(nvars)]
    seen = set(level)
    yield from level
    for _ in range(depth):
        new = []
        for op, arity in sig.symbols:
            for args in itertools.product(level, repeat=arity):
                t = App(op, args)
                if t not in seen:
                    seen.add(t)
                    new.append(t)
        yield from new
        level = level + new
