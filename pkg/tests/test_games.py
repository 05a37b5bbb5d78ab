import random

import pytest

from mtw.errors import VocabularyMismatch
from mtw.games import (
    back_and_forth, ef_solve, ef_unbounded, efq_solve,
)
from mtw.games.ef import check_back_and_forth, verify_strategy
from mtw.structures import Structure, isomorphism
from mtw.syntax import Vocabulary

V_ORD = Vocabulary(sorts=frozenset({0}), relations={"L": (0, 0)})
V_SET = Vocabulary(sorts=frozenset({0}), relations={"E": (0, 0)})


def chain(n):
    return Structure(V_ORD, {0: range(n)},
                     {"L": {(i, j) for i in range(n) for j in range(n) if i < j}})


def bare(n):
    return Structure(V_SET, {0: range(n)}, {"E": set()})


def orders_duplicator_wins(a, b, r):
    # classical closed form for linear orders, used as an independent oracle
    return a == b or (a >= 2 ** r - 1 and b >= 2 ** r - 1)


def sets_duplicator_wins(a, b, r):
    # classical closed form for pure equality, used as an independent oracle
    return a == b or (a >= r and b >= r)


def test_ef_identity_always_duplicator():
    m = chain(3)
    for r in range(4):
        assert ef_solve(m, m, r).winner == "Duplicator"


def test_ef_linear_orders_3_vs_4():
    assert ef_solve(chain(3), chain(4), 2).winner == "Duplicator"
    assert ef_solve(chain(3), chain(4), 3).winner == "Spoiler"


def test_ef_sets_2_vs_3():
    assert ef_solve(bare(2), bare(3), 2).winner == "Duplicator"
    assert ef_solve(bare(2), bare(3), 3).winner == "Spoiler"


def test_ef_against_closed_forms():
    for a in range(1, 5):
        for b in range(1, 5):
            for r in range(0, 4):
                assert (ef_solve(chain(a), chain(b), r).winner == "Duplicator") \
                    == orders_duplicator_wins(a, b, r)
                assert (ef_solve(bare(a), bare(b), r).winner == "Duplicator") \
                    == sets_duplicator_wins(a, b, r)


def test_ef_symmetric_and_monotone():
    rng = random.Random(3)
    for _ in range(15):
        size1, size2 = rng.randint(1, 3), rng.randint(1, 3)
        rel1 = {(i, j) for i in range(size1) for j in range(size1) if rng.random() < 0.5}
        rel2 = {(i, j) for i in range(size2) for j in range(size2) if rng.random() < 0.5}
        m = Structure(V_SET, {0: range(size1)}, {"E": rel1})
        n = Structure(V_SET, {0: range(size2)}, {"E": rel2})
        winners = [ef_solve(m, n, r).winner for r in range(4)]
        winners_sym = [ef_solve(n, m, r).winner for r in range(4)]
        assert winners == winners_sym
        # once spoiler wins he keeps winning with more rounds
        for r in range(3):
            if winners[r] == "Spoiler":
                assert winners[r + 1] == "Spoiler"


def test_ef_strategy_verifies():
    for m, n, r in [(chain(3), chain(4), 2), (chain(3), chain(4), 3),
                    (bare(2), bare(3), 3), (chain(2), chain(2), 2)]:
        res = ef_solve(m, n, r)
        assert verify_strategy(m, n, res)


def test_ef_vocabulary_mismatch():
    with pytest.raises(VocabularyMismatch):
        ef_solve(chain(2), bare(2), 1)


def test_back_and_forth_matches_winner():
    cases = [(chain(3), chain(4), 2), (chain(3), chain(4), 3),
             (bare(2), bare(3), 2), (bare(2), bare(3), 3)]
    for m, n, r in cases:
        seq = back_and_forth(m, n, r)
        winner = ef_solve(m, n, r).winner
        assert (seq is not None) == (winner == "Duplicator")
        if seq is not None:
            assert check_back_and_forth(m, n, seq)
            assert frozenset() in seq.levels[r]


def test_back_and_forth_identity_pure_sets():
    m = bare(3)
    seq = back_and_forth(m, m, 2)
    assert seq is not None
    # on a bare set every injective pairing of the right size survives
    for i, level in enumerate(seq.levels):
        for p in level:
            assert len(p) <= 2 - i


def test_unbounded_agrees_with_isomorphism():
    rng = random.Random(11)
    for _ in range(60):
        size1, size2 = rng.randint(1, 4), rng.randint(1, 4)
        rel1 = {(i, j) for i in range(size1) for j in range(size1) if rng.random() < 0.4}
        rel2 = {(i, j) for i in range(size2) for j in range(size2) if rng.random() < 0.4}
        m = Structure(V_SET, {0: range(size1)}, {"E": rel1})
        n = Structure(V_SET, {0: range(size2)}, {"E": rel2})
        res = ef_unbounded(m, n)
        assert (res.winner == "Duplicator") == (isomorphism(m, n) is not None)


def test_efq_stall_when_threshold_unreachable():
    assert efq_solve(bare(3), bare(9), 1, 5).winner == "Spoiler"


def test_efq_identity():
    assert efq_solve(bare(4), bare(4), 2, 2).winner == "Duplicator"


def test_efq_with_k1_matches_ef_on_pure_sets():
    for a in range(1, 4):
        for b in range(1, 4):
            for r in range(0, 3):
                assert efq_solve(bare(a), bare(b), r, 1).winner == \
                    ef_solve(bare(a), bare(b), r).winner
