"""Brute-force reference implementations for differential testing.

Every function here re-implements a definition directly, without pruning and
without calling the algorithmic code of the main modules: assignments,
partitions, relation families and candidate maps are all materialized in
full.  Only the data types (Structure, Algebra, Lifting, ...) are shared.
Inputs are bounded (carrier <= 4, at most 2**20 candidates per search).
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

from .algebras import Algebra
from .equations import RelAtomOnTerms
from .free_terms import Term, Var
from .horn import Atom, AxiomSet, HornClause
from .liftings import Lifting
from .signatures import quantity_of
from .structures import Structure

MAX_CARRIER = 4
MAX_CANDIDATES = 1 << 20


class OracleBoundError(ValueError):
    pass


def _guard(n: int, candidates: int = 0) -> None:
    if n > MAX_CARRIER:
        raise OracleBoundError(f"carrier {n} exceeds the oracle bound {MAX_CARRIER}")
    if candidates > MAX_CANDIDATES:
        raise OracleBoundError(f"{candidates} candidates exceed the oracle bound")


def _index(t: Sequence[int], n: int) -> int:
    """Position of ``t`` in itertools.product(range(n), repeat=len(t))."""
    i = 0
    for x in t:
        i = i * n + x
    return i


def _tuples(n: int, k: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(n), repeat=k))


def _apply(a: Algebra, k: int, args: Sequence[int]) -> int:
    return a.ops[k][_index(args, a.size)]


# ------------------------------------------------------------------ clauses


def _holds(a: Structure, atom: Atom, h: dict) -> bool:
    return tuple(h[v] for v in atom.vars) in a.rels[a.sig.names.index(atom.rel)]


def oracle_satisfies_clause(a: Structure, cl: HornClause) -> tuple[bool, dict | None]:
    variables = sorted(cl.variables)
    _guard(a.size, a.size ** len(variables))
    for values in itertools.product(range(a.size), repeat=len(variables)):
        h = dict(zip(variables, values))
        if all(_holds(a, p, h) for p in cl.premises):
            c = cl.conclusion
            ok = _holds(a, c, h) if isinstance(c, Atom) else h[c.left] == h[c.right]
            if not ok:
                return False, h
    return True, None


def oracle_in_C(a: Structure, ax: AxiomSet) -> bool:
    return all(oracle_satisfies_clause(a, cl)[0] for cl in ax.clauses)


# ------------------------------------------------------------------ liftings


def oracle_lifting(spec: Lifting, a: Structure, n: int) -> Structure:
    """The lifted structure on A^n, tuple by tuple from the definitions."""
    _guard(a.size)
    points = _tuples(a.size, n)
    rels = []
    for k, (name, arity) in enumerate(a.sig.symbols):
        _guard(a.size, len(points) ** arity)
        out = set()
        for combo in itertools.product(range(len(points)), repeat=arity):
            cols = [points[c] for c in combo]
            if _lifted_holds(spec, a, k, name, cols, n):
                out.add(combo)
        rels.append(frozenset(out))
    return Structure(a.sig, len(points), tuple(rels))


def _lifted_holds(spec: Lifting, a: Structure, k: int, name: str, cols, n: int) -> bool:
    r = a.rels[k]
    kind = spec.kind
    if kind == "discrete":
        return False
    if kind == "product":
        return all(tuple(c[i] for c in cols) in r for i in range(n))
    if kind == "subset":
        return all(tuple(c[i] for c in cols) in r for i in spec.coords)
    if kind == "lex":
        if name != spec.order:
            return False
        u, v = cols
        diffs = [i for i in range(n) if u[i] != v[i]]
        return not diffs or (u[diffs[0]], v[diffs[0]]) in r
    eps = quantity_of(name)
    levels = [(quantity_of(s), j) for j, (s, _) in enumerate(a.sig.symbols)]
    u, v = cols
    if kind == "lipschitz":
        return all(
            any(d * spec.alpha <= eps and (u[i], v[i]) in a.rels[j] for d, j in levels) for i in range(n)
        )
    p = spec.p
    w = [p * p, p * (1 - p), (1 - p) * p, (1 - p) * (1 - p)]
    pairs = [(u[0], v[0]), (u[0], v[1]), (u[1], v[0]), (u[1], v[1])]
    for choice in itertools.product(levels, repeat=4):
        if all(pr in a.rels[j] for pr, (_, j) in zip(pairs, choice)):
            if sum((wi * d for wi, (d, _) in zip(w, choice)), Fraction(0)) <= eps:
                return True
    return False


def oracle_preserves(dom: Structure, cod: Structure, table: Sequence[int]) -> bool:
    return all(
        tuple(table[x] for x in t) in s for r, s in zip(dom.rels, cod.rels) for t in r
    )


def oracle_reflects(dom: Structure, cod: Structure, table: Sequence[int]) -> bool:
    for r, s, (_, arity) in zip(dom.rels, cod.rels, dom.sig.symbols):
        for t in _tuples(dom.size, arity):
            if tuple(table[x] for x in t) in s and t not in r:
                return False
    return True


def oracle_valid_algebra(a: Algebra) -> bool:
    for k, ((_, arity), spec) in enumerate(zip(a.sig.symbols, a.sig.liftings)):
        lifted = oracle_lifting(spec, a.carrier, arity)
        if not oracle_preserves(lifted, a.carrier, a.ops[k]):
            return False
    return True


# ------------------------------------------------------------------- terms


def oracle_eval(t: Term, h: Sequence[int], a: Algebra) -> int:
    if isinstance(t, Var):
        return h[t.index]
    k = [name for name, _ in a.sig.symbols].index(t.op)
    return _apply(a, k, [oracle_eval(s, h, a) for s in t.args])


def oracle_satisfies_equation(a: Algebra, eq) -> tuple[bool, dict | None]:
    """Quantifies over every map from the variables to the carrier."""
    variables = list(eq.variables)
    _guard(a.size, a.size ** len(variables))
    for values in itertools.product(range(a.size), repeat=len(variables)):
        h = dict(zip(variables, values))
        if not all(_holds(a.carrier, p, h) for p in eq.premises):
            continue
        c = eq.conclusion
        if isinstance(c, RelAtomOnTerms):
            ok = tuple(oracle_eval(t, values, a) for t in c.terms) in a.carrier.rels[a.rsig.names.index(c.rel)]
        else:
            ok = oracle_eval(c.left, values, a) == oracle_eval(c.right, values, a)
        if not ok:
            return False, h
    return True, None


def oracle_factor(e: Sequence[int], b: Algebra, h: Sequence[int], c: Algebra) -> tuple[int, ...] | None:
    """Search every table B -> C for an algebra morphism g with g . e = h."""
    _guard(max(b.size, c.size), c.size**b.size)
    for g in itertools.product(range(c.size), repeat=b.size):
        if any(g[e[x]] != h[x] for x in range(len(e))):
            continue
        if not oracle_preserves(b.carrier, c.carrier, g):
            continue
        if all(
            g[_apply(b, k, args)] == _apply(c, k, [g[x] for x in args])
            for k, (_, arity) in enumerate(b.sig.symbols)
            for args in _tuples(b.size, arity)
        ):
            return g
    return None


# --------------------------------------------------------------- quotients


def _partitions(n: int) -> list[tuple[int, ...]]:
    """All maps range(n) -> range(n) with classes numbered by first occurrence."""
    out = set()
    for f in itertools.product(range(n), repeat=n):
        ren: dict[int, int] = {}
        out.add(tuple(ren.setdefault(v, len(ren)) for v in f))
    return sorted(out)


def _families(sig, n: int, base: Sequence[frozenset]):
    """Every relation family on range(n) containing ``base``."""
    free = []
    for k, (_, arity) in enumerate(sig.symbols):
        for t in _tuples(n, arity):
            if t not in base[k]:
                free.append((k, t))
    _guard(n, 1 << len(free))
    for bits in itertools.product((False, True), repeat=len(free)):
        rels = [set(r) for r in base]
        for on, (k, t) in zip(bits, free):
            if on:
                rels[k].add(t)
        yield tuple(frozenset(r) for r in rels)


def _congruence_ops(a: Algebra, cls: Sequence[int]):
    k_count = max(cls) + 1 if cls else 0
    tables = []
    for k, (_, arity) in enumerate(a.sig.symbols):
        table = {}
        for args in _tuples(a.size, arity):
            key = tuple(cls[x] for x in args)
            v = cls[_apply(a, k, args)]
            if table.setdefault(key, v) != v:
                return None
        tables.append(tuple(table[t] for t in _tuples(k_count, arity)))
    return tuple(tables)


def oracle_quotients(a: Algebra, ax: AxiomSet) -> set[tuple[tuple[int, ...], tuple[frozenset, ...]]]:
    """All (class map, codomain relations) of C-quotients of ``a``."""
    _guard(a.size)
    out = set()
    for cls in _partitions(a.size):
        ops = _congruence_ops(a, cls)
        if ops is None:
            continue
        k = max(cls) + 1 if cls else 0
        image = [frozenset(tuple(cls[x] for x in t) for t in r) for r in a.carrier.rels]
        for rels in _families(a.rsig, k, image):
            cod = Structure(a.rsig, k, rels)
            if not oracle_in_C(cod, ax):
                continue
            if oracle_valid_algebra(Algebra(cod, a.sig, ops)):
                out.add((cls, rels))
    return out


def oracle_pairs(a: Algebra, ax: AxiomSet) -> set[tuple[tuple[int, ...], tuple[frozenset, ...]]]:
    """All (congruence, refined relations) satisfying the compatible-pair definition."""
    _guard(a.size)
    type1 = [cl for cl in ax.clauses if isinstance(cl.conclusion, Atom)]
    type2 = [cl for cl in ax.clauses if not isinstance(cl.conclusion, Atom)]
    refinings = []
    for rels in _families(a.rsig, a.size, a.carrier.rels):
        s = Structure(a.rsig, a.size, rels)
        if not all(oracle_satisfies_clause(s, cl)[0] for cl in type1):
            continue
        if not oracle_valid_algebra(Algebra(s, a.sig, a.ops)):
            continue
        refinings.append(s)
    out = set()
    for cls in _partitions(a.size):
        if _congruence_ops(a, cls) is None:
            continue
        for s in refinings:
            saturated = all(
                (t in r) == (u in r)
                for r, (_, arity) in zip(s.rels, a.rsig.symbols)
                for t in _tuples(a.size, arity)
                for u in _tuples(a.size, arity)
                if all(cls[x] == cls[y] for x, y in zip(t, u))
            )
            if not saturated:
                continue
            forced = True
            for cl in type2:
                variables = sorted(cl.variables)
                for values in itertools.product(range(a.size), repeat=len(variables)):
                    h = dict(zip(variables, values))
                    if all(_holds(s, p, h) for p in cl.premises):
                        if cls[h[cl.conclusion.left]] != cls[h[cl.conclusion.right]]:
                            forced = False
                            break
                if not forced:
                    break
            if forced:
                out.add((cls, s.rels))
    return out


def oracle_reflexive(dom: Structure, cod: Structure, table: Sequence[int], c: int | None) -> bool:
    """Every codomain subset of size < c is the bijective, relation-isomorphic
    image of some domain subset."""
    _guard(max(dom.size, cod.size))
    limit = cod.size if c is None else c - 1
    for size in range(0, min(limit, cod.size) + 1):
        for b0 in itertools.combinations(range(cod.size), size):
            found = False
            for a0 in itertools.combinations(range(dom.size), size):
                if sorted(table[x] for x in a0) != list(b0):
                    continue
                iso = True
                for r, s, (_, arity) in zip(dom.rels, cod.rels, dom.sig.symbols):
                    for t in itertools.product(a0, repeat=arity):
                        if (t in r) != (tuple(table[x] for x in t) in s):
                            iso = False
                            break
                    if not iso:
                        break
                if iso:
                    found = True
                    break
            if not found:
                return False
    return True


def oracle_metric_round_trip(d: Sequence[Sequence[Fraction]], q) -> tuple[tuple[Fraction, ...], ...]:
    """Threshold encode a distance matrix and read back the least threshold."""
    n = len(d)
    related = {
        eps: {(i, j) for i in range(n) for j in range(n) if d[i][j] <= eps} for eps in q.elements
    }
    return tuple(
        tuple(min((eps for eps in q.elements if (i, j) in related[eps]), default=Fraction(1)) for j in range(n))
        for i in range(n)
    )


def oracle_term_count(nvars: int, arities: Sequence[int], depth: int) -> int:
    """Count terms of depth <= ``depth`` by explicit generation."""
    level = {("v", i) for i in range(nvars)}
    for _ in range(depth):
        new = set(level)
        for k, arity in enumerate(arities):
            for args in itertools.product(list(level), repeat=arity):
                new.add(("a", k, args))
        level = new
    return len(level)
