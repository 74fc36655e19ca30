from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import builders as B
from relalg.algebras import Algebra
from relalg.equations import (
    ClusteredEquation,
    EquationError,
    RelAtomOnTerms,
    TermEquality,
    abstract_instance,
    abstract_satisfies,
    check_closure_soundness,
    gaifman_components,
    is_clustered,
    satisfies_all,
    satisfies_equation,
    translate_abstract_equation,
)
from relalg.free_terms import App, Var
from relalg.horn import Atom, gmet_preset, metric_to_structure
from relalg.oracle import oracle_satisfies_equation
from relalg.signatures import Q4

H = Fraction(1, 2)
MET = gmet_preset(Q4, ("Refl", "Sym", "Tri", "Pos"))
HALF = metric_to_structure([[0, H], [H, 0]], Q4)
x, y, z = Var(0), Var(1), Var(2)


def m(a, b):
    return App("m", (a, b))


QUANT = ClusteredEquation(
    ("x", "y"), (Atom("=:1/2", ("x", "y")),), RelAtomOnTerms("=:1/4", (m(x, y), m(y, x))), c=3, name="quant"
)
COMM = ClusteredEquation(("x", "y"), (), TermEquality(m(x, y), m(y, x)), name="comm")


def alg(f):
    return Algebra.from_functions(HALF, B.BIN_PRODUCT, {"m": f})


def test_cluster_bound_enforced():
    with pytest.raises(EquationError):
        ClusteredEquation(("x", "y"), (Atom("=:1/2", ("x", "y")),), TermEquality(x, y), c=2)
    eq = ClusteredEquation(("x", "y", "z"), (Atom("=:1/2", ("x", "y")),), TermEquality(x, z), c=3)
    assert gaifman_components(eq) == [frozenset({"x", "y"}), frozenset({"z"})]
    assert is_clustered(eq, 3) and not is_clustered(eq, 2) and is_clustered(eq, None)
    with pytest.raises(EquationError):
        ClusteredEquation(("x", "x"), (), TermEquality(x, x))
    with pytest.raises(EquationError):
        ClusteredEquation(("x",), (Atom("=:1/2", ("x", "w")),), TermEquality(x, x))
    with pytest.raises(EquationError):
        ClusteredEquation(("x",), (), TermEquality(x, y))


def test_intro_laws_on_min_and_left_projection():
    minimum, left = alg(min), alg(lambda a, b: a)
    assert satisfies_equation(minimum, QUANT) and satisfies_equation(minimum, COMM)
    v = satisfies_equation(left, QUANT)
    assert not v and v.witness == {"x": 0, "y": 1}
    assert not satisfies_all(left, [COMM, QUANT])


@given(st.integers(0, 10_000))
def test_satisfaction_matches_oracle(seed):
    r = B.rng(f"equation/{seed}")
    a = B.random_algebra(r, B.random_member(r, MET, r.randint(1, 3)), B.BIN_PRODUCT)
    for eq in (QUANT, COMM):
        assert bool(satisfies_equation(a, eq)) == oracle_satisfies_equation(a, eq)[0]


def test_closure_soundness_counts_skipped_quotients():
    pool = [alg(min), alg(max), alg(lambda a, b: a)]
    rep = check_closure_soundness([QUANT], pool, 3, MET)
    assert rep.ok and rep.members == 2 and rep.products >= 1
    assert rep.skipped_quotients + rep.quotients > 0
    with pytest.raises(ValueError):
        check_closure_soundness([QUANT], pool, 3, MET, quotients="some")


def test_non_reflexive_quotient_can_break_the_law():
    # a 3-point space where min satisfies the law, quotiented non-reflexively
    q = Fraction(1, 4)
    d = [[0, H, H], [H, 0, q], [H, q, 0]]
    carrier = metric_to_structure(d, Q4)
    a = Algebra.from_functions(carrier, B.BIN_PRODUCT, {"m": min})
    assert satisfies_equation(a, QUANT)
    rep = check_closure_soundness([QUANT], [a], 3, MET, quotients="all", max_product=1)
    reflexive = check_closure_soundness([QUANT], [a], 3, MET, max_product=1)
    assert reflexive.ok
    assert rep.quotients == reflexive.quotients + reflexive.skipped_quotients
    assert len(rep.violations) == reflexive.skipped_failing


def test_translation_agrees_with_abstract_satisfaction():
    target = alg(min)
    inst = abstract_instance(HALF, B.BIN_PRODUCT, 1, target, (0, 1), 3, ("a", "b"), MET)
    assert inst.validate() and inst.depth == 1
    phi, eqs = translate_abstract_equation(inst)
    assert all(atom.rel != "=:1" for atom in phi)
    assert eqs and all(e.c == 3 for e in eqs)
    for other in (alg(min), alg(max), alg(lambda a, b: a), alg(lambda a, b: b)):
        assert bool(abstract_satisfies(other, inst)) == bool(satisfies_all(other, eqs))
    assert not abstract_satisfies(alg(lambda a, b: a), inst)
