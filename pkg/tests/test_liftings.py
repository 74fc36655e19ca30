from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import builders as B
from relalg.horn import metric_to_structure
from relalg.liftings import (
    KINDS,
    Lifting,
    LiftingError,
    applicable,
    apply_lifting,
    check_preserves_embeddings,
    check_preserves_erefl,
    check_preserves_Erefl,
    discrete,
    lex,
    lift_map,
    lipschitz,
    lk,
    product_lifting,
    subset,
)
from relalg.oracle import oracle_lifting
from relalg.signatures import Q4, make_poset_signature
from relalg.structures import Structure, StructureMap, compose, encode, identity

POS = make_poset_signature()
CHAIN2 = Structure.build(POS, 2, {"leq": [(0, 0), (0, 1), (1, 1)]})
H = Fraction(1, 2)
Q = Fraction(1, 4)
HALF = metric_to_structure([[0, H], [H, 0]], Q4)


def pair(u, v, n=2):
    return encode(u, [n, n]), encode(v, [n, n])


def test_kinds_and_parameter_validation():
    assert KINDS == ("discrete", "product", "subset", "lex", "lipschitz", "lk")
    with pytest.raises(LiftingError):
        Lifting("pointwise")
    with pytest.raises(LiftingError):
        lipschitz(Fraction(1, 2))
    with pytest.raises(LiftingError):
        lk(1)
    with pytest.raises(LiftingError):
        lk(H).check_arity(3)
    with pytest.raises(LiftingError):
        subset({2}).check_arity(2)
    assert str(subset({1, 0})) == "subset{0,1}" and str(lk(H)) == "lk(1/2)"


def test_discrete_and_product():
    assert apply_lifting(discrete(), CHAIN2, 2).rels == (frozenset(),)
    p = apply_lifting(product_lifting(), CHAIN2, 2)
    assert pair((0, 0), (1, 1)) in p.rels[0]
    assert pair((0, 1), (1, 0)) not in p.rels[0]


def test_subset_constrains_only_chosen_coordinates():
    s = apply_lifting(subset({0}), CHAIN2, 2)
    assert pair((0, 1), (1, 0)) in s.rels[0]
    assert pair((1, 0), (0, 0)) not in s.rels[0]
    everything = apply_lifting(subset(()), CHAIN2, 2)
    assert len(everything.rels[0]) == 16


def test_lex_orders_by_first_difference():
    s = apply_lifting(lex("leq"), CHAIN2, 2)
    assert pair((0, 1), (1, 0)) in s.rels[0]
    assert pair((1, 0), (0, 1)) not in s.rels[0]
    assert pair((1, 1), (1, 1)) in s.rels[0]
    with pytest.raises(LiftingError):
        apply_lifting(lex("leq"), HALF, 2)
    assert not applicable(lex("leq"), HALF, 2) and applicable(lex("leq"), CHAIN2, 2)


def test_lipschitz_scales_distances():
    s = apply_lifting(lipschitz(2), HALF, 1)
    # d(a, b) = 1/2 scaled by 2 reaches 1 only
    assert (0, 1) in s.rel("=:1") and (0, 1) not in s.rel("=:3/4")
    assert (0, 0) in s.rel("=:0")


def test_lk_averages_cross_distances():
    s = apply_lifting(lk(H), HALF, 2)
    # (a, a) vs (a, b): weights 1/4 each over d(a,a), d(a,b), d(a,a), d(a,b) = 1/4
    x, y = pair((0, 0), (0, 1))
    assert (x, y) in s.rel("=:1/4") and (x, y) not in s.rel("=:0")
    # the diagonal of a non-trivial space is not at distance 0 under LK
    z = encode((0, 1), [2, 2])
    assert (z, z) in s.rel("=:1/4") and (z, z) not in s.rel("=:0")


@given(st.integers(0, 10_000))
def test_liftings_match_oracle(seed):
    r = B.rng(f"lifting/{seed}")
    spec, n = r.choice(B.six_liftings())
    ax = B.POSET if spec.kind == "lex" else r.choice((B.GMET_Q3, B.LVAL_Q3))
    s = B.random_structure(r, ax.sig, r.randint(1, 3), 0.4)
    assert apply_lifting(spec, s, n) == oracle_lifting(spec, s, n)


def test_lift_map_is_functorial():
    c3 = Structure.build(POS, 3, {"leq": [(i, j) for i in range(3) for j in range(3) if i <= j]})
    f = StructureMap(CHAIN2, c3, (0, 2))
    g = StructureMap(c3, CHAIN2, (0, 1, 1))
    for spec in (product_lifting(), subset({1}), lex("leq"), discrete()):
        assert lift_map(spec, compose(g, f), 2).table == compose(lift_map(spec, g, 2), lift_map(spec, f, 2)).table
        assert lift_map(spec, identity(c3), 2).table == tuple(range(9))


def test_preservation_checks_reject_bad_samples():
    not_embedding = StructureMap(CHAIN2, CHAIN2, (0, 0))
    with pytest.raises(LiftingError):
        check_preserves_embeddings(product_lifting(), [not_embedding])
    with pytest.raises(LiftingError):
        check_preserves_erefl(product_lifting(), [not_embedding])
    assert check_preserves_Erefl is check_preserves_erefl
    emb = StructureMap(Structure.build(POS, 1, {"leq": [(0, 0)]}), CHAIN2, (1,))
    assert check_preserves_embeddings(lex("leq"), [emb])
