import random

import pytest

from mtw.errors import (
    EmptyRelativization,
    NameClash,
    NonRelational,
    NotClosed,
    NotSubvocabulary,
)
from mtw.structures import (
    Structure, SymCard, SymbolicEqStructure, disjoint_union, expand_constants,
    isomorphism, reduct, relativize,
)
from mtw.syntax import Vocabulary

V_E = Vocabulary(sorts=frozenset({0}), relations={"E": (0, 0)})
V_ES = Vocabulary(sorts=frozenset({0}), relations={"E": (0, 0), "S": (0,)})


def chain(n):
    """Linear order 0 < 1 < ... < n-1 as a strict order relation."""
    voc = Vocabulary(sorts=frozenset({0}), relations={"L": (0, 0)})
    return Structure(voc, {0: range(n)},
                     {"L": {(i, j) for i in range(n) for j in range(n) if i < j}})


def bare(n):
    return Structure(Vocabulary(sorts=frozenset({0}), relations={"E": (0, 0)}),
                     {0: range(n)}, {"E": set()})


def test_reduct_identity():
    m = Structure(V_ES, {0: [0, 1]}, {"E": {(0, 0)}, "S": {(1,)}})
    assert reduct(m, V_ES) == m


def test_reduct_drops_symbol():
    m = Structure(V_ES, {0: [0, 1]}, {"E": {(0, 0)}, "S": {(1,)}})
    r = reduct(m, V_E)
    assert set(r.relations) == {"E"}
    assert r.domain == m.domain


def test_reduct_rejects_nonsub():
    m = Structure(V_E, {0: [0]}, {"E": set()})
    with pytest.raises(NotSubvocabulary):
        reduct(m, V_ES)


def test_reduct_chain_property():
    m = Structure(V_ES, {0: [0, 1, 2]}, {"E": {(0, 1)}, "S": {(2,)}})
    sub = V_E
    subsub = Vocabulary(sorts=frozenset({0}))
    assert reduct(reduct(m, sub), subsub) == reduct(m, subsub)


def test_expand_constants():
    m = Structure(V_E, {0: [0, 1]}, {"E": set()})
    m2 = expand_constants(m, [("c", 0, 1)])
    assert m2.constants == {"c": 1}
    assert expand_constants(m, []) == m
    with pytest.raises(NameClash):
        expand_constants(m2, [("c", 0, 0)])


def test_relativize_full_domain_is_identity():
    m = chain(3)
    assert relativize(m, 0, [0, 1, 2]) == m


def test_relativize_restricts_relations():
    voc = Vocabulary(sorts=frozenset({0}), relations={"R": (0, 0)})
    m = Structure(voc, {0: [0, 1]}, {"R": {(0, 0), (0, 1), (1, 0)}})
    r = relativize(m, 0, [0])
    assert r.domain[0] == (0,)
    assert r.relations["R"] == frozenset({(0, 0)})


def test_relativize_requires_closure():
    voc = Vocabulary(sorts=frozenset({0}), functions={"f": ((0,), 0)})
    m = Structure(voc, {0: [0, 1]}, functions={"f": {(0,): 1, (1,): 0}})
    with pytest.raises(NotClosed):
        relativize(m, 0, [0])


def test_relativize_rejects_empty():
    m = chain(2)
    with pytest.raises(EmptyRelativization):
        relativize(m, 0, [])


def test_relativize_idempotent_on_output():
    voc = Vocabulary(sorts=frozenset({0}), relations={"R": (0, 0)})
    m = Structure(voc, {0: [0, 1, 2]}, {"R": {(0, 1), (1, 2)}})
    r = relativize(m, 0, [0, 1])
    assert relativize(r, 0, [0, 1]) == r


def test_disjoint_union_sizes():
    u = disjoint_union([bare(2), bare(3)])
    assert u.size(0) == 5
    single = disjoint_union([bare(4)])
    assert isomorphism(single, bare(4)) is not None


def test_disjoint_union_rejects_functions():
    voc = Vocabulary(sorts=frozenset({0}), functions={"f": ((0,), 0)})
    m = Structure(voc, {0: [0]}, functions={"f": {(0,): 0}})
    with pytest.raises(NonRelational):
        disjoint_union([m, m])


def test_isomorphism_identity():
    m = chain(3)
    iso = isomorphism(m, m)
    assert iso == {0: {0: 0, 1: 1, 2: 2}}


def test_isomorphism_two_element_orders():
    voc = Vocabulary(sorts=frozenset({0}), relations={"L": (0, 0)})
    m = Structure(voc, {0: [0, 1]}, {"L": {(0, 1)}})
    n = Structure(voc, {0: [0, 1]}, {"L": {(1, 0)}})
    iso = isomorphism(m, n)
    assert iso == {0: {0: 1, 1: 0}}  # the unique order isomorphism


def test_isomorphism_size_mismatch():
    assert isomorphism(chain(2), chain(3)) is None


def _random_structure(rng, size):
    voc = Vocabulary(sorts=frozenset({0}), relations={"R": (0, 0)})
    tuples = {(i, j) for i in range(size) for j in range(size) if rng.random() < 0.4}
    return Structure(voc, {0: range(size)}, {"R": tuples})


def test_isomorphism_is_equivalence_on_random_pairs():
    rng = random.Random(7)
    for _ in range(40):
        size = rng.randint(1, 4)
        m = _random_structure(rng, size)
        n = _random_structure(rng, size)
        k = _random_structure(rng, size)
        assert isomorphism(m, m) is not None
        mn = isomorphism(m, n)
        if mn is not None:
            nm = isomorphism(n, m)
            assert nm is not None  # symmetry (witness invertible)
        nk = isomorphism(n, k)
        if mn is not None and nk is not None:
            assert isomorphism(m, k) is not None  # transitivity


def test_symcard_ordering_and_arith():
    f3, a0, a1 = SymCard.fin(3), SymCard.aleph(0), SymCard.aleph(1)
    assert f3 < a0 < a1
    assert f3 + a0 == a0
    assert a0 * a1 == a1
    assert SymCard.fin(0) * a1 == SymCard.fin(0)
    assert SymCard.fin(2) * SymCard.fin(3) == SymCard.fin(6)


def test_symbolic_eq_structure_validation():
    e = SymbolicEqStructure(((SymCard.aleph(1), SymCard.aleph(1)),))
    assert e.total_size() == SymCard.aleph(1)
    with pytest.raises(ValueError):
        SymbolicEqStructure(())
    with pytest.raises(ValueError):
        SymbolicEqStructure(((SymCard.fin(0), SymCard.aleph(1)),))
