"""Command-line front end: ``relalg SUBCOMMAND ...``.

Every check prints one JSON object per line (keys ``kind``, ``subject``,
``result``, ``witness`` and an optional ``detail``).  Exit codes: 0 when all
checks pass, 1 when a checked property fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from typing import Any, Callable, Sequence, TextIO

from . import __version__
from .algebras import Algebra, check_algebra_morphism, is_valid, validate_algebra
from .dsl import DslError, Model, load, parse, serialize
from .equations import (
    ClusteredEquation,
    RelAtomOnTerms,
    abstract_instance,
    abstract_satisfies,
    check_closure_soundness,
    satisfies_all,
    satisfies_equation,
    translate_abstract_equation,
)
from .free_terms import build_free_slice, canonical_injection, format_term, term_count
from .horn import AxiomSet, gmet_round_trip, in_C
from .quotients_exactness import (
    DEFAULT_MAX_CARRIER,
    EnumerationBoundError,
    check_EX_characterization,
    check_exactness,
    enumerate_compatible_pairs,
    enumerate_quotients,
    is_c_reflexive,
    structures_in_C,
    validate_pair,
)
from .reports import report_line
from .signatures import QuantityLattice
from .structures import Structure, classify_map


class UsageError(Exception):
    pass


class Reporter:
    def __init__(self, out: TextIO, pretty: bool):
        self.out, self.pretty = out, pretty
        self.failed = False

    def emit(self, kind: str, subject: str, result: bool, witness: Any = None, **detail: Any) -> None:
        self.failed |= not result
        if self.pretty:
            status = "PASS" if result else "FAIL"
            extra = "" if witness is None else f"  witness={witness}"
            info = "".join(f"  {k}={v}" for k, v in sorted(detail.items()))
            self.out.write(f"{status} {kind} {subject}{extra}{info}\n")
        else:
            self.out.write(report_line(kind, subject, result, witness, **detail) + "\n")


# ------------------------------------------------------------ name helpers


def _names(m: Model, s: Structure) -> tuple[str, ...]:
    return m.elements_of(s)


def _rels_by_name(s: Structure, names: Sequence[str]) -> dict[str, list[list[str]]]:
    return {
        rel: [[names[x] for x in t] for t in sorted(r)] for rel, r in zip(s.sig.names, s.rels) if r
    }


def _classes(table: Sequence[int], names: Sequence[str]) -> list[list[str]]:
    out: dict[int, list[str]] = {}
    for x, c in enumerate(table):
        out.setdefault(c, []).append(names[x])
    return [out[c] for c in sorted(out)]


def _named_assignment(h: dict | None, names: Sequence[str]) -> dict | None:
    return None if h is None else {v: names[x] for v, x in h.items()}


def _get(table: dict, name: str, kind: str):
    if name not in table:
        raise UsageError(f"unknown {kind} {name!r}")
    return table[name]


def _theory(m: Model, name: str | None) -> AxiomSet:
    if name is not None:
        return _get(m.axioms, name, "axioms")
    if m.theory is None:
        raise UsageError("no theory declared; pass --axioms")
    return m.theory


def format_equation(eq: ClusteredEquation) -> str:
    prem = ", ".join(f"{a.rel}({', '.join(a.vars)})" for a in eq.premises)
    c = eq.conclusion
    if isinstance(c, RelAtomOnTerms):
        concl = f"{c.rel}({', '.join(format_term(t, eq.variables) for t in c.terms)})"
    else:
        concl = f"{format_term(c.left, eq.variables)} = {format_term(c.right, eq.variables)}"
    return f"{prem + ' ' if prem else ''}|- {concl}"


# ---------------------------------------------------------------- checks


def _report_in_C(r: Reporter, m: Model, name: str, ax: AxiomSet) -> None:
    ns = _get(m.structures, name, "structure")
    v = in_C(ns.structure, ax)
    witness = None
    if not v:
        label, h = v.witness
        witness = {"clause": label, "assignment": _named_assignment(h, ns.elements)}
    r.emit("in_C", name, v.ok, witness, axioms=ax.name)


def _report_valid(r: Reporter, m: Model, name: str, ax: AxiomSet | None) -> None:
    na = _get(m.algebras, name, "algebra")
    v = validate_algebra(na.algebra, ax)
    witness = None
    if not v:
        f = v.witness
        if f[0] == "carrier":
            witness = {"clause": f[1], "assignment": _named_assignment(f[2], na.elements)}
        else:
            witness = {"op": f[0], "relation": f[1], "args": [[na.elements[x] for x in t] for t in f[2]]}
    r.emit("valid", name, v.ok, witness)


def _report_satisfies(r: Reporter, m: Model, alg: str, eq: str, expect: bool = True) -> None:
    na = _get(m.algebras, alg, "algebra")
    e = _get(m.equations, eq, "equation")
    v = satisfies_equation(na.algebra, e)
    witness = _named_assignment(v.witness, na.elements)
    kind = "satisfies" if expect else "fails"
    r.emit(kind, f"{alg}/{eq}", v.ok == expect, witness, equation=format_equation(e))


def _report_exactness(r: Reporter, m: Model, alg: str, ax: AxiomSet, max_carrier: int) -> None:
    na = _get(m.algebras, alg, "algebra")
    rep = check_exactness(na.algebra, ax, max_carrier)
    r.emit(
        "exactness",
        alg,
        rep.ok,
        [list(x) for x in rep.mismatches] or None,
        quotients=rep.quotients,
        pairs=rep.pairs,
        bijective=rep.bijective,
        order_preserving=rep.order_preserving,
    )


def _report_reflexive(r: Reporter, m: Model, name: str, c: int | None, ax: AxiomSet | None, expect: bool = True) -> None:
    f = _get(m.maps, name, "map")
    if not classify_map(f).surjective:
        raise UsageError(f"map {name!r} is not surjective")
    v = is_c_reflexive(f, c)
    cod_names = _names(m, f.cod)
    witness = None if v.ok else [cod_names[x] for x in v.witness]
    detail: dict[str, Any] = {"c": "inf" if c is None else c}
    ok = v.ok == expect
    if c is not None:
        ex = check_EX_characterization(f, c, c - 1, ax)
        detail["projective"] = ex.witness["projective"]
        ok = ok and ex.ok
    r.emit("reflexive" if expect else "not_reflexive", name, ok, witness, **detail)


# ------------------------------------------------------------ subcommands


def cmd_check(args, r: Reporter) -> None:
    m = _load(args.file)
    ax = m.theory
    if ax is not None:
        for name, ns in m.structures.items():
            if ns.structure.sig == ax.sig:
                _report_in_C(r, m, name, ax)
    for name, na in m.algebras.items():
        _report_valid(r, m, name, ax if ax is not None and na.algebra.rsig == ax.sig else None)
    for name, f in m.maps.items():
        cls = classify_map(f)
        r.emit("morphism", name, cls.preserves, None, **{k: getattr(cls, k) for k in ("reflects", "injective", "surjective")})
    for d in m.checks:
        a = d.args
        if d.kind == "in_C":
            _report_in_C(r, m, a[0], _theory(m, a[1] if len(a) > 1 else None))
        elif d.kind == "valid":
            _report_valid(r, m, a[0], _theory(m, a[1]) if len(a) > 1 else None)
        elif d.kind in ("satisfies", "fails"):
            _report_satisfies(r, m, a[0], a[1], d.kind == "satisfies")
        elif d.kind == "exactness":
            _report_exactness(r, m, a[0], _theory(m, a[1] if len(a) > 1 else None), args.max_carrier)
        elif d.kind in ("reflexive", "not_reflexive"):
            _report_reflexive(r, m, a[0], d.c, m.theory, d.kind == "reflexive")


def cmd_satisfies(args, r: Reporter) -> None:
    m = _load(args.file)
    _report_satisfies(r, m, args.algebra, args.equation)


def cmd_free(args, r: Reporter) -> None:
    m = _load(args.file)
    ns = _get(m.structures, args.structure, "structure")
    lsig = _get(m.operations, args.operations, "operations block")
    s = build_free_slice(ns.structure, lsig, args.depth)
    if args.terms:
        for i, t in enumerate(s.terms):
            r.emit("term", str(i), True, format_term(t, ns.elements), depth=t.depth)
    expected = term_count(ns.structure.size, lsig.base, args.depth)
    embedding = classify_map(canonical_injection(s)).is_embedding
    r.emit(
        "free",
        f"{args.structure}/{args.operations}",
        embedding and expected == len(s),
        None,
        depth=args.depth,
        terms=len(s),
        stages=list(s.stage_sizes),
        relations={rel: len(x) for rel, x in zip(s.structure.sig.names, s.structure.rels)},
    )


def cmd_reflexive(args, r: Reporter) -> None:
    m = _load(args.file)
    _report_reflexive(r, m, args.map, args.c, m.theory)


def cmd_quotients(args, r: Reporter) -> None:
    m = _load(args.file)
    na = _get(m.algebras, args.algebra, "algebra")
    ax = _theory(m, args.axioms)
    qs = enumerate_quotients(na.algebra, ax, args.max_carrier)
    for i, q in enumerate(qs):
        ok = bool(check_algebra_morphism(q.map)) and bool(in_C(q.cod.carrier, ax))
        labels = [f"c{k}" for k in range(q.cod.size)]
        detail: dict[str, Any] = {"classes": _classes(q.table, na.elements), "relations": _rels_by_name(q.cod.carrier, labels)}
        if args.c is not None:
            detail["reflexive"] = is_c_reflexive(q, args.c).ok
        r.emit("quotient", f"{args.algebra}#{i}", ok, None, **detail)
    r.emit("quotients", args.algebra, True, None, count=len(qs), axioms=ax.name)


def cmd_pairs(args, r: Reporter) -> None:
    m = _load(args.file)
    na = _get(m.algebras, args.algebra, "algebra")
    ax = _theory(m, args.axioms)
    ps = enumerate_compatible_pairs(na.algebra, ax, args.max_carrier)
    for i, p in enumerate(ps):
        v = validate_pair(p, ax)
        r.emit(
            "pair",
            f"{args.algebra}#{i}",
            v.ok,
            v.reason or None,
            classes=_classes(p.congruence, na.elements),
            relations=_rels_by_name(p.refined, na.elements),
        )
    r.emit("pairs", args.algebra, True, None, count=len(ps), axioms=ax.name)


def cmd_exactness(args, r: Reporter) -> None:
    m = _load(args.file)
    _report_exactness(r, m, args.algebra, _theory(m, args.axioms), args.max_carrier)


def _generate_pool(ax: AxiomSet, lsig, size: int) -> list[Algebra]:
    pool = []
    for n in range(1, size + 1):
        for s in structures_in_C(ax, n):
            tables = [list(itertools.product(range(n), repeat=n**a)) for _, a in lsig.symbols]
            for combo in itertools.product(*tables):
                a = Algebra(s, lsig, combo)
                if is_valid(a):
                    pool.append(a)
    return pool


def cmd_closure(args, r: Reporter) -> None:
    m = _load(args.file)
    ax = _theory(m, args.axioms)
    eqs = [_get(m.equations, e, "equation") for e in _split(args.equations)]
    if args.pool:
        pool = [_get(m.algebras, a, "algebra").algebra for a in _split(args.pool)]
    elif args.generate:
        lsig = _get(m.operations, args.operations, "operations block") if args.operations else None
        if lsig is None:
            raise UsageError("--generate needs --operations")
        pool = _generate_pool(ax, lsig, args.generate)
    else:
        raise UsageError("pass --pool or --generate")
    rep = check_closure_soundness(
        eqs, pool, args.c, ax, "all" if args.all_quotients else "reflexive", args.max_carrier, args.max_carrier
    )
    r.emit(
        "closure",
        ",".join(e.name for e in eqs),
        rep.ok,
        [list(map(str, v)) for v in rep.violations[:5]] or None,
        pool=len(pool),
        members=rep.members,
        products=rep.products,
        subalgebras=rep.subalgebras,
        quotients=rep.quotients,
        skipped_quotients=rep.skipped_quotients,
        skipped_failing=rep.skipped_failing,
    )


def cmd_roundtrip(args, r: Reporter) -> None:
    q = QuantityLattice.uniform(args.steps)
    flags = _split(args.flags)
    for n in range(args.points + 1):
        rt = gmet_round_trip(q, flags, n)
        witness = None if rt.failure is None else [rt.failure[0], [[str(x) for x in row] for row in rt.failure[1]]]
        r.emit(
            "roundtrip-gmet",
            f"{n} points",
            rt.ok,
            witness,
            lattice=[str(x) for x in q.elements],
            flags=list(flags),
            metrics=rt.metrics,
            structures=rt.structures,
        )


def cmd_translate(args, r: Reporter) -> None:
    m = _load(args.file)
    ns = _get(m.structures, args.structure, "structure")
    target = _get(m.algebras, args.algebra, "algebra")
    lsig = target.algebra.sig
    gens = _split(args.generators)
    index = {e: i for i, e in enumerate(target.elements)}
    if len(gens) != ns.structure.size or any(g not in index for g in gens):
        raise UsageError("--generators must name one target element per element of the structure")
    ax = m.theory
    inst = abstract_instance(
        ns.structure, lsig, args.depth, target.algebra, [index[g] for g in gens], args.c, ns.elements, ax
    )
    v = inst.validate()
    phi, eqs = translate_abstract_equation(inst)
    if args.list:
        for i, eq in enumerate(eqs):
            r.emit("translated", f"{args.algebra}#{i}", True, None, equation=format_equation(eq))
    r.emit(
        "translate",
        f"{args.structure}->{args.algebra}",
        v.ok,
        None if v.ok else v.reason,
        depth=args.depth,
        premises=len(phi),
        equations=len(eqs),
        slice_terms=len(inst.slice),
    )
    for name in _split(args.check or ""):
        a = _get(m.algebras, name, "algebra").algebra
        left, right = abstract_satisfies(a, inst).ok, satisfies_all(a, eqs).ok
        r.emit("translate-agree", name, left == right, None, abstract=left, clustered=right)


def cmd_fmt(args, r: Reporter) -> None:
    text = _read(args.file)
    r.out.write(serialize(parse(text)))


def _split(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str) -> Model:
    return load(_read(path))


def _cluster(text: str) -> int | None:
    if text == "inf":
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("c must be a positive integer or 'inf'") from None
    if value < 1:
        raise argparse.ArgumentTypeError("c must be a positive integer or 'inf'")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON-lines reports (default)")
    fmt.add_argument("--pretty", action="store_true", help="human-readable reports")
    common.add_argument("--max-carrier", type=int, default=DEFAULT_MAX_CARRIER, help="enumeration bound")

    p = argparse.ArgumentParser(prog="relalg", description="Algebras over relational structures.")
    p.add_argument("--version", action="version", version=f"relalg {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(func=func)
        return sp

    sp = add("check", cmd_check, "validate every declaration and run check directives")
    sp.add_argument("file")
    sp = add("satisfies", cmd_satisfies, "does an algebra satisfy an equation")
    sp.add_argument("file")
    sp.add_argument("algebra")
    sp.add_argument("equation")
    sp = add("free", cmd_free, "build a depth-bounded free algebra slice")
    sp.add_argument("file")
    sp.add_argument("structure")
    sp.add_argument("operations")
    sp.add_argument("--depth", type=int, default=1)
    sp.add_argument("--terms", action="store_true", help="also list the slice's terms")
    sp = add("reflexive", cmd_reflexive, "c-reflexivity of a declared surjective map")
    sp.add_argument("file")
    sp.add_argument("map")
    sp.add_argument("--c", type=_cluster, default=None)
    for name, func, help in (
        ("quotients", cmd_quotients, "enumerate C-quotients of an algebra"),
        ("pairs", cmd_pairs, "enumerate compatible pairs of an algebra"),
        ("exactness", cmd_exactness, "compare quotients with compatible pairs"),
    ):
        sp = add(name, func, help)
        sp.add_argument("file")
        sp.add_argument("algebra")
        sp.add_argument("--axioms", default=None)
        if name == "quotients":
            sp.add_argument("--c", type=_cluster, default=None)
    sp = add("closure", cmd_closure, "variety closure soundness over a pool")
    sp.add_argument("file")
    sp.add_argument("--equations", required=True)
    sp.add_argument("--pool", default="")
    sp.add_argument("--generate", type=int, default=0, help="pool of all valid algebras up to this size")
    sp.add_argument("--operations", default=None)
    sp.add_argument("--axioms", default=None)
    sp.add_argument("--c", type=_cluster, default=None)
    sp.add_argument("--all-quotients", action="store_true")
    sp = add("roundtrip-gmet", cmd_roundtrip, "exhaustive metric/structure round trip")
    sp.add_argument("--steps", type=int, default=4, help="lattice {0, 1/steps, ..., 1}")
    sp.add_argument("--points", type=int, default=3)
    sp.add_argument("--flags", default="Refl,Sym,Tri,Pos")
    sp = add("translate", cmd_translate, "translate an abstract equation into clustered equations")
    sp.add_argument("file")
    sp.add_argument("structure")
    sp.add_argument("algebra")
    sp.add_argument("--generators", required=True, help="target element per structure element")
    sp.add_argument("--depth", type=int, default=1)
    sp.add_argument("--c", type=_cluster, default=None)
    sp.add_argument("--list", action="store_true", help="emit every translated equation")
    sp.add_argument("--check", default=None, help="algebras on which to compare both readings")
    sp = add("fmt", cmd_fmt, "print the canonical form of a document")
    sp.add_argument("file")
    return p


def run(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    r = Reporter(out, args.pretty)
    try:
        args.func(args, r)
    except DslError as exc:
        for d in exc.diagnostics:
            err.write(f"{getattr(args, 'file', '<input>')}:{d}\n")
        return 2
    except (UsageError, EnumerationBoundError, ValueError) as exc:
        err.write(f"relalg: error: {exc}\n")
        return 2
    return 1 if r.failed else 0


def main() -> None:
    sys.exit(run())
