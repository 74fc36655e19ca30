"""Acceptance criteria 1-11.

Each criterion is a function returning ``(ok, detail)``.  Under pytest every
criterion is one parametrized test, and the conftest prints one
``criterion N: PASS|FAIL`` line per criterion in the terminal summary.  Run as
a script (``python tests/test_acceptance.py``) to get the same lines on stdout.
"""

from __future__ import annotations

import itertools
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
if str(HERE) not in sys.path:
    sys.path.insert(0, str(HERE))

import builders as B  # noqa: E402
import oracle_sweep  # noqa: E402
from golden_cases import CORPUS, GOLDEN, golden_cases, run_case  # noqa: E402

from relalg import dsl  # noqa: E402
from relalg.algebras import Algebra, AlgebraMap, algebra_morphisms, factor_through, is_valid  # noqa: E402
from relalg.equations import (  # noqa: E402
    ClusteredEquation,
    RelAtomOnTerms,
    TermEquality,
    abstract_instance,
    abstract_satisfies,
    check_closure_soundness,
    satisfies_all,
    translate_abstract_equation,
)
from relalg.free_terms import (  # noqa: E402
    App,
    Var,
    build_free_slice,
    canonical_injection,
    extend,
    extend_is_morphism,
    extension_table,
    term_count,
)
from relalg.horn import Atom, gmet_preset, gmet_round_trip, in_C, poset_preset  # noqa: E402
from relalg.liftings import check_preserves_embeddings, check_preserves_Erefl, discrete, product_lifting  # noqa: E402
from relalg.oracle import oracle_factor, oracle_term_count  # noqa: E402
from relalg.quotients_exactness import check_EX_characterization, check_exactness, structures_in_C  # noqa: E402
from relalg.signatures import Q2, Q4, LiftedSignature  # noqa: E402
from relalg.structures import (  # noqa: E402
    Structure,
    StructureMap,
    classify_map,
    morphisms,
    product,
    substructure,
)

CRITERIA: dict[int, tuple[str, object]] = {}


def criterion(n: int, title: str):
    def register(fn):
        CRITERIA[n] = (title, fn)
        return fn

    return register


# ----------------------------------------------------------------------- 1

ROUND_TRIP_FLAGS = {
    "metric": ("Refl", "Sym", "Tri", "Pos"),
    "ultrametric": ("Refl", "Sym", "Max", "Pos"),
    "pseudometric": ("Refl", "Sym", "Tri"),
}


@criterion(1, "GMet round trip over Q4, <= 4 points, exhaustive")
def crit_round_trip():
    problems, counts = [], {}
    for label, flags in ROUND_TRIP_FLAGS.items():
        for n in range(1, 5):
            rt = gmet_round_trip(Q4, flags, n)
            counts[f"{label}/{n}"] = rt.metrics
            if not rt.ok:
                problems.append((label, n, rt.failure, rt.metrics, rt.structures))
    return not problems, problems or counts


# ----------------------------------------------------------------------- 2


@criterion(2, "C closed under products and substructures, 500 cases per preset")
def crit_closure_lemma():
    failures, cases = [], 0
    for label, ax in B.PRESETS.items():
        r = B.rng(f"closure-lemma/{label}")
        for case in range(500):
            a = B.random_member(r, ax, r.randint(1, 3))
            b = B.random_member(r, ax, r.randint(1, 3))
            p = product([a, b], sig=ax.sig)[0]
            subset = [x for x in range(a.size) if r.random() < 0.6] or [0]
            sub = substructure(a, subset)[0]
            cases += 1
            if not in_C(p, ax) or not in_C(sub, ax):
                failures.append((label, case))
    return not failures, failures or f"{cases} cases"


# ----------------------------------------------------------------------- 3

HOM_SIGS = {
    "unary": LiftedSignature.build([("u", 1, product_lifting())]),
    "binary": LiftedSignature.build([("m", 2, product_lifting())]),
}


def _all_valid_algebras(ax, lsig, sizes):
    out = []
    for n in sizes:
        for carrier in structures_in_C(ax, n):
            arities = [a for _, a in lsig.symbols]
            slots = [n**a for a in arities]
            for flat in itertools.product(range(n), repeat=sum(slots)):
                tables, i = [], 0
                for s in slots:
                    tables.append(flat[i : i + s])
                    i += s
                alg = Algebra(carrier, lsig, tuple(tables))
                if is_valid(alg, ax):
                    out.append(alg)
    return out


@criterion(3, "factor_through agrees with exhaustive search, unary <= 3 and binary <= 2 over Q2 (reduced scope)")
def crit_homomorphism():
    ax = gmet_preset(Q2, ("Refl", "Sym", "Tri"), name="pseudometric")
    checked, disagreements = 0, []
    for label, lsig in HOM_SIGS.items():
        sizes = (1, 2, 3) if label == "unary" else (1, 2)
        pool = _all_valid_algebras(ax, lsig, sizes)
        homs = {(i, j): algebra_morphisms(a, b) for i, a in enumerate(pool) for j, b in enumerate(pool)}
        for (i, j), es in homs.items():
            for e in es:
                if set(e.table) != set(range(pool[j].size)):
                    continue
                for k in range(len(pool)):
                    for h in homs[(i, k)]:
                        got = factor_through(e, h)
                        want = oracle_factor(e.table, pool[j], h.table, pool[k])
                        checked += 1
                        if bool(got) != (want is not None) or (got and got.map.table != want):
                            disagreements.append((label, i, j, k, e.table, h.table))
    return not disagreements and checked > 0, disagreements[:5] or f"{checked} triples"


# ----------------------------------------------------------------------- 4

FREE_SIGS = {
    "m": LiftedSignature.build([("m", 2, product_lifting())]),
    "m,u": LiftedSignature.build([("m", 2, product_lifting()), ("u", 1, product_lifting())]),
    "c,m": LiftedSignature.build([("c", 0, discrete()), ("m", 2, product_lifting())]),
}


def _hash_identity(t, h, alg, ev):
    if isinstance(t, Var):
        return ev(t) == h[t.index]
    args = [ev(s) for s in t.args]
    return ev(t) == alg.op(t.op, *args) and all(_hash_identity(s, h, alg, ev) for s in t.args)


@criterion(4, "free slices: term counts, canonical injection, h# identity")
def crit_free_slices():
    problems, cases = [], 0
    ax = B.POSET
    for label, lsig in FREE_SIGS.items():
        arities = [a for _, a in lsig.symbols]
        for depth in range(4):
            xsize = 2 if depth <= 2 else 1
            x = B.random_member(B.rng(f"free/{label}/{depth}/x"), ax, xsize)
            s = build_free_slice(x, lsig, depth)
            want = term_count(xsize, lsig.base, depth)
            if len(s) != want or want != oracle_term_count(xsize, arities, depth):
                problems.append((label, depth, "count", len(s), want))
            if not classify_map(canonical_injection(s)).is_embedding:
                problems.append((label, depth, "injection"))
            r = B.rng(f"free/{label}/{depth}/hash")
            target = B.random_member(r, ax, 3)
            alg = B.random_valid_algebra(r, target, lsig)
            hs = [m.table for m in morphisms(x, alg.carrier)]
            for _ in range(100):
                h = r.choice(hs)
                t = s.terms[r.randrange(len(s))]
                cases += 1
                if not _hash_identity(t, h, alg, extend(h, alg)):
                    problems.append((label, depth, "hash", t, h))
            if depth <= 2 and not all(extend_is_morphism(h, alg, s) for h in hs):
                problems.append((label, depth, "h# not a morphism"))
    return not problems, problems[:5] or f"{cases} h# checks"


# ----------------------------------------------------------------------- 5


EX_PRESETS = [
    gmet_preset(Q2, flags, name="gmet(" + ",".join(flags) + ")")
    for flags in (("Refl", "Sym", "Tri"), ("Refl", "Sym"), ("Refl",), ("Sym",))
]


@criterion(5, "E_X = c-reflexive quotients, GMet over Q2, <= 3 elements, c in {2,3}")
def crit_ex_characterization():
    problems, checked = [], 0
    for ax in EX_PRESETS:
        members = {n: structures_in_C(ax, n) for n in (1, 2, 3)}
        for n, m in itertools.product((1, 2, 3), repeat=2):
            if m > n:
                continue
            for dom in members[n]:
                for cod in members[m]:
                    for f in morphisms(dom, cod):
                        if len(set(f.table)) != m:
                            continue
                        for c in (2, 3):
                            checked += 1
                            v = check_EX_characterization(f, c, c - 1, ax)
                            if not v:
                                problems.append((ax.name, dom, cod, f.table, c, v.witness))
    return not problems and checked > 0, problems[:3] or f"{checked} (surjection, c) cases"


# ----------------------------------------------------------------------- 6


def _intro_laws():
    quant = ClusteredEquation(
        ("x", "y"),
        (Atom("=:1/2", ("x", "y")),),
        RelAtomOnTerms("=:1/4", (App("m", (Var(0), Var(1))), App("m", (Var(1), Var(0))))),
        c=3,
        name="quant",
    )
    comm = ClusteredEquation(
        ("x", "y"), (), TermEquality(App("m", (Var(0), Var(1))), App("m", (Var(1), Var(0)))), name="comm"
    )
    return quant, comm


@criterion(6, "models of the intro laws closed under products, subalgebras, quotients")
def crit_variety_soundness():
    quant, comm = _intro_laws()
    out, ok = {}, True
    cases = [
        ("quant/Q4", quant, 3, gmet_preset(Q4, ("Refl", "Sym", "Tri", "Pos")), "reflexive"),
        ("comm/Q4", comm, None, gmet_preset(Q4, ("Refl", "Sym", "Tri", "Pos")), "all"),
        ("comm/Q2", comm, None, gmet_preset(Q2, ("Refl", "Sym", "Tri", "Pos")), "all"),
    ]
    for label, eq, c, ax, mode in cases:
        pool = _all_valid_algebras(ax, B.BIN_PRODUCT, (2,))
        rep = check_closure_soundness([eq], pool, c, ax, quotients=mode)
        out[label] = (len(pool), rep.members, rep.products, rep.subalgebras, rep.quotients, len(rep.violations))
        ok &= rep.ok and rep.members > 0
    return ok, out


# ----------------------------------------------------------------------- 7


def _abstract_instances():
    lsig = B.BIN_PRODUCT
    out = []
    for ax in (gmet_preset(Q4, ("Refl", "Sym", "Tri", "Pos")), B.POSET):
        r = B.rng(f"translate/{ax.name}")
        while len([i for i in out if i.ax is ax]) < 6:
            xsize = r.randint(1, 3)
            x = B.random_member(r, ax, xsize)
            target = B.random_valid_algebra(r, B.random_member(r, ax, r.randint(1, 2)), lsig)
            if target is None:
                continue
            gens = [m.table for m in morphisms(x, target.carrier)]
            gens = [g for g in gens if r.random() < 0.5] or gens
            for g in gens[:1]:
                for depth in (0, 1):
                    slice_terms = build_free_slice(x, lsig, depth)
                    if len(set(extension_table(g, target, slice_terms))) != target.size:
                        continue
                    inst = abstract_instance(x, lsig, depth, target, g, 4, (), ax)
                    if inst.validate(ax):
                        out.append(inst)
    return out


@criterion(7, "abstract satisfaction = satisfaction of the translated clustered equations")
def crit_translation():
    problems, checked = [], 0
    instances = _abstract_instances()
    for idx, inst in enumerate(instances):
        ax = inst.ax
        pool = []
        for n in (1, 2, 3):
            r = B.rng(f"translate/pool/{idx}/{n}")
            for _ in range(4):
                alg = B.random_valid_algebra(r, B.random_member(r, ax, n), inst.target.sig)
                if alg is not None:
                    pool.append(alg)
        pool.append(inst.target)
        _, eqs = translate_abstract_equation(inst)
        for a in pool:
            checked += 1
            if bool(abstract_satisfies(a, inst)) != bool(satisfies_all(a, eqs)):
                problems.append((idx, a))
    ok = len(instances) >= 10 and not problems
    return ok, problems[:3] or f"{len(instances)} instances, {checked} pool checks"


# ----------------------------------------------------------------------- 8


def corpus_algebras():
    """(file, name, algebra, axioms) for every corpus algebra of size <= 3."""
    out = []
    for path in CORPUS:
        model = dsl.load(path.read_text())
        theories = ([model.theory] if model.theory else []) + list(model.axioms.values())
        for name, na in model.algebras.items():
            ax = next((t for t in theories if t.sig == na.algebra.rsig), None)
            if ax is not None and na.algebra.size <= 3 and is_valid(na.algebra, ax):
                out.append((path.name, name, na.algebra, ax))
    return out


@criterion(8, "exactness on every corpus algebra")
def crit_exactness():
    problems, summary = [], []
    for fname, name, alg, ax in corpus_algebras():
        rep = check_exactness(alg, ax)
        summary.append(f"{fname}:{name}={rep.quotients}")
        if not (rep.quotients == rep.pairs and rep.bijective and rep.order_preserving):
            problems.append((fname, name, rep.mismatches))
    return not problems and len(summary) >= 8, problems or summary


# ----------------------------------------------------------------------- 9


def _lifting_presets(spec):
    if spec.kind == "lex":
        return [B.POSET]
    if spec.kind in ("lipschitz", "lk"):
        return [B.GMET_Q3, B.GMET_Q3_REFL_SYM]
    return [B.POSET, B.GMET_Q3, B.GMET_Q3_REFL_SYM]


@criterion(9, "every lifting kind preserves embeddings and E<-> maps")
def crit_liftings():
    problems, counts = [], {}
    for spec, arity in B.six_liftings():
        emb, erefl = [], []
        for ax in _lifting_presets(spec):
            members = [s for n in (1, 2, 3) for s in structures_in_C(ax, n)]
            for dom, cod in itertools.product(members, repeat=2):
                for table in itertools.product(range(cod.size), repeat=dom.size):
                    cls = classify_map(StructureMap(dom, cod, table))
                    if cls.is_embedding:
                        emb.append(StructureMap(dom, cod, table))
                    if cls.is_erefl:
                        erefl.append(StructureMap(dom, cod, table))
        v1 = check_preserves_embeddings(spec, emb, arity)
        v2 = check_preserves_Erefl(spec, erefl, arity)
        counts[str(spec)] = (len(emb), len(erefl))
        if not v1 or not v2:
            problems.append((str(spec), v1.failures[:3], v2.failures[:3]))
    return not problems, problems or counts


# ---------------------------------------------------------------------- 10


@criterion(10, "differential oracle sweep, 1000 seeded cases per oracle pair")
def crit_oracle_sweep():
    results = oracle_sweep.run_all(1000)
    bad = {k: v for k, v in results.items() if v}
    return not bad, bad or {k: 0 for k in results}


# ---------------------------------------------------------------------- 11


@criterion(11, "fixture corpus parses, round-trips, and matches pinned reports")
def crit_cli():
    problems = []
    if len(CORPUS) < 12:
        problems.append(("corpus size", len(CORPUS)))
    for path in CORPUS:
        text = path.read_text()
        doc = dsl.parse(text)
        again = dsl.parse(dsl.serialize(doc))
        if again != doc or dsl.serialize(again) != dsl.serialize(doc):
            problems.append((path.name, "round trip"))
    for name, argv in golden_cases():
        code, out = run_case(argv)
        pinned = (GOLDEN / f"{name}.jsonl").read_text()
        if f"# exit {code}\n" + out != pinned:
            problems.append((name, "golden mismatch"))
    return not problems, problems or f"{len(CORPUS)} files, {len(golden_cases())} pinned reports"


# ------------------------------------------------------------------ drivers


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=lambda n: f"{n:02d}")
def test_criterion(number):
    title, fn = CRITERIA[number]
    ok, detail = fn()
    assert ok, f"{title}: {detail}"


def main() -> int:
    failed = 0
    for number in sorted(CRITERIA):
        title, fn = CRITERIA[number]
        start = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # report and keep going
            ok, detail = False, repr(exc)
        failed += not ok
        status = "PASS" if ok else "FAIL"
        print(f"criterion {number}: {status} ({time.perf_counter() - start:.1f}s) {title} -- {detail}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
