"""Ehrenfeucht-Fraisse game engines.

`ef` has the n-move game, back-and-forth sequences and the unbounded game on
finite structures; `efq` the finite-threshold set-move variant; `symbolic` the
cardinal set-move variant on symbolic equivalence structures; `shelah` the
clocked promise game.
"""

from .ef import (  # noqa: F401
    GameResult, Position, BackAndForthSequence,
    ef_solve, back_and_forth, ef_unbounded, is_partial_isomorphism,
)
from .efq import efq_solve  # noqa: F401
from .symbolic import SymPosition, efq_symbolic  # noqa: F401
from .shelah import ShelahState, shelah_solve  # noqa: F401
