import itertools

import pytest

from mtw.errors import BudgetExceeded
from mtw.games import shelah_solve
from mtw.games.shelah import verify_shelah_strategy
from mtw.structures import Structure
from mtw.syntax import Vocabulary

V = Vocabulary(sorts=frozenset({0}), relations={"P": (0,)})


def st(n, pset):
    return Structure(V, {0: range(n)}, {"P": {(i,) for i in pset}})


def all_structures_up_to_2():
    out = []
    for n in (1, 2):
        for r in range(n + 1):
            out.append(st(n, set(range(r))))
    return out


def test_isomorphic_inputs_duplicator():
    a = st(2, {0})
    b = st(2, {1})
    for beta in (1, 2, 3):
        for theta in (1, 2):
            assert shelah_solve(a, b, beta, theta).winner == "Duplicator"


def test_beta1_universal_deferral():
    # the single round carries clock 0; coloring everything 1 with an empty
    # map discharges the only obligation vacuously
    for a in all_structures_up_to_2():
        for b in all_structures_up_to_2():
            res = shelah_solve(a, b, 1, 2)
            assert res.winner == "Duplicator"


def test_clock_monotonicity():
    for a, b in itertools.product(all_structures_up_to_2(), repeat=2):
        winners = {beta: shelah_solve(a, b, beta, 2).winner for beta in (1, 2, 3)}
        for beta in (2, 3):
            if winners[beta] == "Duplicator":
                for smaller in range(1, beta):
                    assert winners[smaller] == "Duplicator"


def test_deferral_beats_distinguishable_pair():
    # with a natural-number clock the game lasts at most beta rounds, so
    # colors >= beta never fall due and total deferral wins even on
    # non-isomorphic structures
    a, b = st(2, {0}), st(2, set())
    res = shelah_solve(a, b, 3, 2)
    assert res.winner == "Duplicator"
    assert verify_shelah_strategy(a, b, 3, 2, res)


def test_strategy_replay_on_identical():
    a = st(2, {0})
    res = shelah_solve(a, a, 2, 2)
    assert res.winner == "Duplicator"
    assert verify_shelah_strategy(a, a, 2, 2, res)


def test_budget_guard():
    a = st(1, set())
    with pytest.raises(BudgetExceeded):
        shelah_solve(a, a, 9, 1)
