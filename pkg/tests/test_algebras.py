from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

import builders as B
from relalg.algebras import (
    Algebra,
    AlgebraError,
    AlgebraMap,
    algebra_morphisms,
    algebra_product,
    check_algebra_morphism,
    closure_under_ops,
    factor_through,
    identity,
    is_valid,
    subalgebras,
    validate_algebra,
)
from relalg.free_terms import App, FreeAlgebraSlice, Var, build_free_slice, check_term, format_term, term_count, terms_up_to
from relalg.liftings import discrete, product_lifting
from relalg.oracle import oracle_factor, oracle_valid_algebra
from relalg.signatures import AlgebraicSignature, LiftedSignature, make_poset_signature
from relalg.structures import Structure, classify_map

POS = make_poset_signature()
C2 = Structure.build(POS, 2, {"leq": [(0, 0), (0, 1), (1, 1)]})
C3 = Structure.build(POS, 3, {"leq": [(i, j) for i in range(3) for j in range(3) if i <= j]})
BIN = B.BIN_PRODUCT


def minimum(carrier):
    return Algebra.from_functions(carrier, BIN, {"m": min})


def test_table_shape_checked():
    with pytest.raises(AlgebraError):
        Algebra(C2, BIN, ((0, 0, 0),))
    with pytest.raises(AlgebraError):
        Algebra(C2, BIN, ((0, 0, 0, 2),))


def test_validity_and_witness():
    assert is_valid(minimum(C3))
    swap = Algebra.from_functions(C2, BIN, {"m": lambda x, y: 1 - x})
    v = validate_algebra(swap)
    assert not v and v.witness[0] == "m"
    # any table is valid under the discrete lifting
    disc = LiftedSignature.build([("m", 2, discrete())])
    assert is_valid(Algebra.from_functions(C2, disc, {"m": lambda x, y: 1 - x}))


@given(st.integers(0, 10_000))
def test_validity_matches_oracle(seed):
    r = B.rng(f"valid/{seed}")
    a = B.random_algebra(r, B.random_member(r, B.POSET, r.randint(1, 3)), BIN)
    assert is_valid(a) == oracle_valid_algebra(a)


def test_product_and_subalgebras():
    a = minimum(C2)
    p, projections = algebra_product([a, minimum(C3)])
    assert p.size == 6 and is_valid(p)
    assert all(check_algebra_morphism(pi) for pi in projections)
    subs = subalgebras(minimum(C3))
    # every subset is closed under min, the empty one included (no constants)
    assert len(subs) == 8 and subs[0][0] == ()
    const = Algebra.from_functions(C3, BIN, {"m": lambda x, y: 2})
    assert closure_under_ops(const, [0]) == frozenset({0, 2})


def test_factor_through_conditions():
    a = minimum(C3)
    b = minimum(C2)
    e = AlgebraMap(a, b, (0, 1, 1))
    assert check_algebra_morphism(e)
    h_ok = AlgebraMap(a, b, (0, 1, 1))
    assert factor_through(e, h_ok).map.table == (0, 1)
    h_kernel = AlgebraMap(a, a, (0, 1, 2))
    got = factor_through(e, h_kernel)
    assert not got and got.condition == "kernel"
    with pytest.raises(AlgebraError):
        factor_through(AlgebraMap(a, a, (0, 0, 0)), h_ok)


def test_factor_relation_condition():
    # e identifies nothing but adds the pair (1, 0) in its codomain; h cannot follow
    top = Structure.build(POS, 2, {"leq": [(0, 0), (1, 1), (0, 1), (1, 0)]})
    left = LiftedSignature.build([("m", 2, product_lifting())])
    a = Algebra.from_functions(C2, left, {"m": lambda x, y: x})
    b = Algebra.from_functions(top, left, {"m": lambda x, y: x})
    e, h = AlgebraMap(a, b, (0, 1)), identity(a)
    got = factor_through(e, h)
    assert not got and got.condition == "relation"
    assert oracle_factor(e.table, b, h.table, a) is None


def test_algebra_morphisms_are_equivariant():
    a = minimum(C3)
    for h in algebra_morphisms(a, minimum(C2)):
        assert check_algebra_morphism(h) and classify_map(h.structure_map).preserves


# ------------------------------------------------------------ free terms


def test_term_counts_follow_recurrence():
    sig = AlgebraicSignature((("m", 2),))
    assert [term_count(2, sig, d) for d in range(4)] == [2, 6, 38, 1446]
    assert len(list(terms_up_to(2, sig, 2))) == 38
    sig2 = AlgebraicSignature((("c", 0), ("m", 2)))
    assert [term_count(1, sig2, d) for d in range(4)] == [1, 3, 11, 123]


def test_check_term_rejects_bad_terms():
    sig = AlgebraicSignature((("m", 2),))
    check_term(App("m", (Var(0), Var(1))), sig, 2)
    with pytest.raises(ValueError):
        check_term(App("m", (Var(0),)), sig, 2)
    with pytest.raises(ValueError):
        check_term(Var(3), sig, 2)
    assert format_term(App("m", (Var(0), App("m", (Var(1), Var(0))))), ["x", "y"]) == "m(x, m(y, x))"


def test_free_slice_stages_are_prefixes():
    s = build_free_slice(C2, BIN, 2)
    assert isinstance(s, FreeAlgebraSlice)
    assert s.stage_sizes == (2, 6, 38)
    assert s.restrict(1) == build_free_slice(C2, BIN, 1).structure
    depths = [t.depth for t in s.terms]
    assert depths == sorted(depths)
    # the product lifting relates m(x, x) <= m(y, y) because x <= y
    i, j = s.index[App("m", (Var(0), Var(0)))], s.index[App("m", (Var(1), Var(1)))]
    assert (i, j) in s.structure.rel("leq")
