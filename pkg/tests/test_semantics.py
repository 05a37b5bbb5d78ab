import itertools
import random

import pytest

from mtw.errors import (
    MultiFreeVariableGuard,
    SymbolicQuantifierOnFiniteStructure,
    UnboundVariable,
)
from mtw.games import ef_solve
from mtw.semantics import (
    Countermodel, EntailsUpToBound, entails_bounded, enumerate_structures,
    hintikka_rank_formula, rank_classes, relativize_formula, satisfies,
)
from mtw.structures import Structure, relativize
from mtw.syntax import (
    Top, Vocabulary, dual_negation, parse_formula, vocabulary,
)

V1 = Vocabulary(sorts=frozenset({0}), relations={"R": (0, 0), "P": (0,), "Q": (0,)})


def struct(n, rel=(), p=(), q=()):
    return Structure(V1, {0: range(n)},
                     {"R": set(rel), "P": {(i,) for i in p}, "Q": {(i,) for i in q}})


def test_satisfies_reflexive_loop():
    m = struct(1, rel={(0, 0)})
    f = parse_formula("forall x:0. R(x,x)", V1)
    assert satisfies(m, f)


def test_satisfies_threshold_counting():
    m = struct(3, p={0, 1})
    assert satisfies(m, parse_formula("Qge 2 x:0. P(x)", V1))
    assert not satisfies(m, parse_formula("Qge 3 x:0. P(x)", V1))


def test_satisfies_sort_overlap_embedding():
    voc = Vocabulary(sorts=frozenset({0, 1}))
    f = parse_formula("forall x:1. exists y:0. y = x", voc, allow_cross_sort_eq=True)
    inside = Structure(voc, {0: [0, 1, 2], 1: [1, 2]})
    outside = Structure(voc, {0: [0, 1], 1: [1, 2]})
    assert satisfies(inside, f)
    assert not satisfies(outside, f)


def test_satisfies_unbound_variable():
    m = struct(1)
    f = parse_formula("P(c)", Vocabulary(sorts=frozenset({0}), relations={"P": (0,)},
                                         constants={"c": 0}))
    with pytest.raises(Exception):
        satisfies(m, f)  # vocabulary mismatch: c is not interpreted
    open_formula = parse_formula("forall x:0. P(x)", V1).body
    with pytest.raises(UnboundVariable):
        satisfies(m, open_formula)


def test_satisfies_rejects_qaleph():
    m = struct(2)
    f = parse_formula("Qaleph 0 x:0. P(x)", V1)
    with pytest.raises(SymbolicQuantifierOnFiniteStructure):
        satisfies(m, f)


def test_dual_negation_semantic_contract():
    rng = random.Random(5)
    texts = [
        "forall x:0. Or[not P(x), Q(x)]",
        "exists x:0. And[P(x), not Q(x)]",
        "Qge 2 x:0. P(x)",
        "not exists x:0. R(x,x)",
        "And[exists x:0. P(x), forall y:0. Q(y)]",
    ]
    for _ in range(60):
        n = rng.randint(1, 3)
        m = struct(
            n,
            rel={(i, j) for i in range(n) for j in range(n) if rng.random() < 0.4},
            p={i for i in range(n) if rng.random() < 0.5},
            q={i for i in range(n) if rng.random() < 0.5},
        )
        for text in texts:
            f = parse_formula(text, V1)
            assert satisfies(m, dual_negation(f)) == (not satisfies(m, f))


# --- relativization ---------------------------------------------------------

def test_relativize_formula_shapes():
    f = parse_formula("exists x:0. P(x)", V1)
    g = parse_formula("forall x:0. P(x)", V1)
    guard = parse_formula("forall x:0. Q(x)", V1).body  # Q(x) with x free
    rf = relativize_formula(f, guard)
    rg = relativize_formula(g, guard)
    assert "exists" in str(type(rf).__name__).lower() or rf is not None
    # exists picks up a conjunctive guard, forall an implicational one
    from mtw.syntax import format_formula
    assert format_formula(rf) == "exists x:0. And[Q(x), P(x)]"
    assert format_formula(rg) == "forall x:0. Or[not Q(x), P(x)]"


def test_relativize_formula_guard_arity():
    f = parse_formula("exists x:0. P(x)", V1)
    with pytest.raises(MultiFreeVariableGuard):
        relativize_formula(f, parse_formula("forall x:0. R(x,x)", V1))


def test_relativize_full_domain_guard():
    f = parse_formula("exists x:0. P(x)", V1)
    guard = parse_formula("forall x:0. x = x", V1).body
    rf = relativize_formula(f, guard)
    for p in ([], [0], [0, 1]):
        m = struct(2, p=p)
        assert satisfies(m, rf) == satisfies(m, f)


def test_relativization_contract_random():
    rng = random.Random(13)
    texts = [
        "exists x:0. P(x)",
        "forall x:0. Or[not P(x), exists y:0. R(x,y)]",
        "Qge 2 x:0. x = x",
        "forall x:0. forall y:0. Or[not R(x,y), R(y,x)]",
    ]
    guard = parse_formula("forall x:0. Q(x)", V1).body  # Q(x)
    checked = 0
    for _ in range(200):
        n = rng.randint(1, 4)
        m = struct(
            n,
            rel={(i, j) for i in range(n) for j in range(n) if rng.random() < 0.4},
            p={i for i in range(n) if rng.random() < 0.5},
            q={i for i in range(n) if rng.random() < 0.6},
        )
        keep = {i for i in range(n) if (i,) in m.relations["Q"]}
        if not keep:
            continue
        sub = relativize(m, 0, keep)
        for text in texts:
            f = parse_formula(text, V1)
            assert satisfies(m, relativize_formula(f, guard)) == satisfies(sub, f)
            checked += 1
    assert checked > 100


# --- bounded entailment -----------------------------------------------------

def test_entails_reflexive():
    f = parse_formula("exists x:0. P(x)", V1)
    verdict = entails_bounded([f], f, 2)
    assert isinstance(verdict, EntailsUpToBound)


def test_entails_finds_least_countermodel():
    prem = parse_formula("exists x:0. P(x)", V1)
    concl = parse_formula("forall x:0. P(x)", V1)
    verdict = entails_bounded([prem], concl, 3)
    assert isinstance(verdict, Countermodel)
    m = verdict.structure
    assert m.size(0) == 2
    assert m.relations["P"] == frozenset({(0,)})  # least in enumeration order
    assert satisfies(m, prem) and not satisfies(m, concl)


def test_entails_modus_ponens_shape():
    prem1 = parse_formula("forall x:0. Or[not P(x), Q(x)]", V1)
    prem2 = parse_formula("forall x:0. P(x)", V1)
    concl = parse_formula("forall x:0. Q(x)", V1)
    assert isinstance(entails_bounded([prem1, prem2], concl, 3), EntailsUpToBound)


def test_countermodels_reverify():
    rng = random.Random(23)
    texts = [
        "forall x:0. P(x)", "exists x:0. And[P(x), Q(x)]",
        "forall x:0. Or[not P(x), Q(x)]", "exists x:0. R(x,x)",
    ]
    for _ in range(20):
        prem = parse_formula(rng.choice(texts), V1)
        concl = parse_formula(rng.choice(texts), V1)
        verdict = entails_bounded([prem], concl, 2)
        if isinstance(verdict, Countermodel):
            assert satisfies(verdict.structure, prem)
            assert not satisfies(verdict.structure, concl)


# --- characteristic formulas and rank classes -------------------------------

V_E = Vocabulary(sorts=frozenset({0}), relations={"E": (0, 0)})


def bare(n):
    return Structure(V_E, {0: range(n)}, {"E": set()})


def test_rank0_no_constants_is_top():
    assert hintikka_rank_formula(bare(2), 0) == Top()


def test_rank_formula_equal_iff_equivalent():
    f2 = hintikka_rank_formula(bare(2), 2)
    g2 = hintikka_rank_formula(bare(3), 2)
    assert f2 == g2  # sets of size 2 and 3 agree up to rank 2
    f3 = hintikka_rank_formula(bare(2), 3)
    g3 = hintikka_rank_formula(bare(3), 3)
    assert f3 != g3
    assert satisfies(bare(2), f3) and not satisfies(bare(3), f3)
    assert satisfies(bare(3), g3) and not satisfies(bare(2), g3)


def test_rank_formula_self_satisfaction():
    rng = random.Random(31)
    for _ in range(10):
        n = rng.randint(1, 3)
        m = Structure(V_E, {0: range(n)},
                      {"E": {(i, j) for i in range(n) for j in range(n)
                             if rng.random() < 0.4}})
        for r in range(0, 3):
            assert satisfies(m, hintikka_rank_formula(m, r))


def test_rank_formula_matches_game():
    structures = []
    for n in (1, 2):
        for bits in itertools.product([0, 1], repeat=n * n):
            rel = {(i, j) for k, (i, j) in enumerate(
                itertools.product(range(n), repeat=2)) if bits[k]}
            structures.append(Structure(V_E, {0: range(n)}, {"E": rel}))
    for m in structures[:8]:
        h = hintikka_rank_formula(m, 2)
        for n_ in structures[:8]:
            assert satisfies(n_, h) == (ef_solve(m, n_, 2).winner == "Duplicator")


def test_rank_classes_pure_sets():
    ms = [bare(n) for n in (1, 2, 3, 4, 5)]
    assert rank_classes(ms, 2) == [[0], [1, 2, 3, 4]]
    assert rank_classes(ms, 0) == [[0, 1, 2, 3, 4]]


def test_rank_classes_refine():
    ms = [bare(n) for n in (1, 2, 3, 4, 5)]
    coarse = rank_classes(ms, 1)
    fine = rank_classes(ms, 3)
    for cls in fine:
        assert any(set(cls) <= set(c) for c in coarse)
