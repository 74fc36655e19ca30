from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from relalg.signatures import (
    Q2,
    Q4,
    AlgebraicSignature,
    QuantityLattice,
    RelationalSignature,
    SignatureError,
    lattice_of,
    make_gmet_signature,
    make_partial_algebra_signature,
    make_poset_signature,
    quantity_name,
    quantity_of,
)
from relalg.structures import (
    Structure,
    StructureError,
    StructureMap,
    classify_map,
    compose,
    coproduct,
    decode,
    encode,
    enumerate_substructures,
    identity,
    image_factorize,
    is_isomorphic,
    morphisms,
    preserves,
    product,
    relabel,
    substructure,
)

POS = make_poset_signature()


def chain(n: int) -> Structure:
    return Structure.build(POS, n, {"leq": [(i, j) for i in range(n) for j in range(n) if i <= j]})


def antichain(n: int) -> Structure:
    return Structure.build(POS, n, {"leq": [(i, i) for i in range(n)]})


# ------------------------------------------------------------ signatures


def test_quantity_lattice_rounds_sums_up():
    q = QuantityLattice.of(0, Fraction(1, 3), 1)
    assert q.elements[q.add[1][1]] == 1
    assert Q4.elements[Q4.add[1][2]] == Fraction(3, 4)
    assert Q4.elements[Q4.add[3][3]] == 1
    assert Q4.join[1][3] == 3


@pytest.mark.parametrize("values", [(0, Fraction(1, 2)), (Fraction(1, 2), 1), (0, 1, Fraction(3, 2))])
def test_quantity_lattice_requires_bounds(values):
    with pytest.raises(SignatureError):
        QuantityLattice(tuple(Fraction(v) for v in values))


def test_quantity_names_round_trip():
    for e in Q4:
        assert quantity_of(quantity_name(e)) == e
    assert quantity_of("leq") is None
    assert lattice_of(make_gmet_signature(Q4)) == Q4
    with pytest.raises(SignatureError):
        lattice_of(POS)


def test_signature_validation():
    with pytest.raises(SignatureError):
        RelationalSignature((("R", 0),))
    with pytest.raises(SignatureError):
        RelationalSignature((("R", 1), ("R", 2)))
    with pytest.raises(SignatureError):
        AlgebraicSignature((("f", -1),))
    s = RelationalSignature((("R", 1), ("E", 2)))
    assert s.names == ("R", "E") and s.arity("E") == 2 and "R" in s
    with pytest.raises(SignatureError):
        s.index("missing")


def test_partial_algebra_signature_shifts_arity():
    p = AlgebraicSignature((("f", 2), ("c", 0)))
    s = make_partial_algebra_signature(p)
    assert s.symbols == (("alpha_f", 3), ("alpha_c", 1))


# ------------------------------------------------------------ structures


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4).flatmap(
    lambda sizes: st.tuples(st.just(sizes), st.tuples(*[st.integers(0, s - 1) for s in sizes]))
))
def test_encode_decode_inverse(case):
    sizes, digits = case
    assert decode(encode(digits, sizes), sizes) == digits


def test_structure_rejects_bad_tuples():
    with pytest.raises(StructureError):
        Structure.build(POS, 2, {"leq": [(0, 2)]})
    with pytest.raises(StructureError):
        Structure(POS, 2, (frozenset({(0,)}),))
    with pytest.raises(SignatureError):
        Structure.build(POS, 2, {"lt": [(0, 1)]})


def test_classify_map_kinds():
    c2, a2 = chain(2), antichain(2)
    inc = StructureMap(a2, c2, (0, 1))
    cls = classify_map(inc)
    assert cls.preserves and not cls.reflects and cls.surjective and not cls.is_embedding
    assert classify_map(identity(c2)).is_iso
    assert not classify_map(StructureMap(c2, chain(1), (0, 0))).reflects
    total = Structure.build(POS, 2, {"leq": list(itertools.product(range(2), repeat=2))})
    assert classify_map(StructureMap(total, chain(1), (0, 0))).is_erefl
    assert not preserves(StructureMap(c2, c2, (1, 0)))


def test_compose_and_morphism_enumeration():
    c2, c3 = chain(2), chain(3)
    ms = list(morphisms(c2, c3))
    # monotone maps from a 2-chain into a 3-chain: pairs i <= j
    assert len(ms) == 6
    f = StructureMap(c2, c3, (0, 2))
    g = StructureMap(c3, chain(1), (0, 0, 0))
    assert compose(g, f).table == (0, 0)


def test_product_projections_and_coproduct_injections():
    a, b = chain(2), antichain(2)
    p, projections = product([a, b])
    assert p.size == 4
    assert all(classify_map(pi).preserves for pi in projections)
    c, injections = coproduct([a, b])
    assert c.size == 4
    assert all(classify_map(i).is_embedding for i in injections)


def test_substructures_are_embeddings_and_factorization():
    c3 = chain(3)
    for subset, sub in enumerate_substructures(c3):
        assert classify_map(substructure(c3, subset)[1]).is_embedding
    f = StructureMap(chain(2), c3, (1, 1))
    surj, emb = image_factorize(f)
    assert compose(emb, surj).table == f.table
    assert classify_map(surj).surjective and classify_map(emb).is_embedding


@given(st.permutations(range(3)))
def test_relabel_is_isomorphic(perm):
    v = Structure.build(POS, 3, {"leq": [(0, 0), (1, 1), (2, 2), (0, 2), (1, 2)]})
    assert is_isomorphic(v, relabel(v, perm))
    assert not is_isomorphic(v, chain(3))


def test_morphisms_agree_with_filtering_all_maps():
    a = Structure.build(POS, 3, {"leq": [(0, 1), (1, 1)]})
    b = chain(2)
    brute = [t for t in itertools.product(range(2), repeat=3) if preserves(StructureMap(a, b, t))]
    assert sorted(m.table for m in morphisms(a, b)) == sorted(brute)
