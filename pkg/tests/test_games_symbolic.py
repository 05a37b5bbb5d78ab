import pytest

from mtw.errors import BudgetExceeded
from mtw.games import efq_symbolic
from mtw.games.symbolic import matching_class_policy, verify_symbolic_strategy
from mtw.structures import SymCard, SymbolicEqStructure

A0, A1 = SymCard.aleph(0), SymCard.aleph(1)

MANY = SymbolicEqStructure(((A1, A1),))       # aleph_1 classes, each aleph_1
FEW = SymbolicEqStructure(((A0, A1),))        # aleph_0 classes, each aleph_1
ONE_BIG = SymbolicEqStructure(((SymCard.fin(1), A1),))
MANY_SINGLETONS = SymbolicEqStructure(((A1, SymCard.fin(1)),))


def test_theorem_pair_duplicator_all_rounds():
    for rounds in (1, 2, 3, 4):
        res = efq_symbolic(MANY, FEW, rounds, 1)
        assert res.winner == "Duplicator"
        assert verify_symbolic_strategy(MANY, FEW, rounds, 1, res)


def test_identity_duplicator():
    assert efq_symbolic(MANY, MANY, 3, 1).winner == "Duplicator"
    assert efq_symbolic(FEW, FEW, 3, 1).winner == "Duplicator"


def test_control_pair_spoiler():
    # two same-class elements on the left have no image among singletons
    assert efq_symbolic(ONE_BIG, MANY_SINGLETONS, 2, 1).winner == "Spoiler"


def test_paper_policy_replays_on_theorem_pair():
    res = efq_symbolic(MANY, FEW, 4, 1)
    policy = matching_class_policy(MANY, FEW)
    assert verify_symbolic_strategy(MANY, FEW, 4, 1, res, policy=policy)


def test_budget_guard():
    with pytest.raises(BudgetExceeded):
        efq_symbolic(MANY, FEW, 5, 1)


def test_symmetry_of_winner():
    for rounds in (1, 2, 3):
        assert efq_symbolic(FEW, MANY, rounds, 1).winner == "Duplicator"
    assert efq_symbolic(MANY_SINGLETONS, ONE_BIG, 2, 1).winner == "Spoiler"
