"""The finite-threshold generalized-quantifier game.

On top of the usual element rounds, Spoiler may spend a round on a set
exchange: he plays a set X of at least k elements of one sort in one
structure, Duplicator answers a set Y of at least k elements of that sort in
the other, Spoiler picks y in Y, Duplicator picks x in X, and the position
grows by the pair (x, y) while the sets are abandoned.

Only sets of size exactly k are enumerated: enlarging X beyond k gives
Duplicator strictly more final picks, and enlarging Y gives Spoiler strictly
more, so both players lose nothing under the restriction and the computed
winner is exact.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

from ..errors import BudgetExceeded, VocabularyMismatch
from ..structures import Structure
from .ef import (
    DEFAULT_ROUND_BUDGET, GameResult, PositionKey, _answers, _check_vocabulary,
    _pair_of, _spoiler_moves, is_partial_isomorphism,
)


def _set_challenges(m: Structure, n: Structure, k: int):
    out = []
    for side, struct in (("L", m), ("R", n)):
        for s in sorted(struct.voc.sorts):
            dom = struct.domain[s]
            if len(dom) >= k:
                for xs in combinations(sorted(dom), k):
                    out.append((side, s, xs))
    return out


def _set_answers(m: Structure, n: Structure, side: str, sort, k: int):
    other = n if side == "L" else m
    dom = other.domain[sort]
    if len(dom) < k:
        return []
    return list(combinations(sorted(dom), k))


def _set_pair(side: str, x: int, y: int):
    # x comes from Spoiler's set (side `side`), y from Duplicator's set
    return (x, y) if side == "L" else (y, x)


def efq_solve(m: Structure, n: Structure, rounds: int, k: int,
              budget: int = DEFAULT_ROUND_BUDGET) -> GameResult:
    """Exact winner of the threshold game with k >= 1."""
    _check_vocabulary(m, n)
    if k < 1:
        raise ValueError("threshold must be >= 1")
    if rounds > budget:
        raise BudgetExceeded(f"{rounds} rounds exceeds budget {budget}")

    elem_moves = _spoiler_moves(m, n)
    set_moves = _set_challenges(m, n, k)

    @lru_cache(maxsize=None)
    def dup_wins(pos_key: PositionKey, r: int) -> bool:
        if not is_partial_isomorphism(m, n, pos_key):
            return False
        if r == 0:
            return True
        for move in elem_moves:
            if not any(dup_wins(pos_key | {_pair_of(move, ans)}, r - 1)
                       for ans in _answers(m, n, move)):
                return False
        for side, s, xs in set_moves:
            if not any(
                all(any(dup_wins(pos_key | {_set_pair(side, x, y)}, r - 1)
                        for x in xs)
                    for y in ys)
                for ys in _set_answers(m, n, side, s, k)
            ):
                return False
        return True

    start: PositionKey = frozenset()
    winner = "Duplicator" if dup_wins(start, rounds) else "Spoiler"

    strategy: dict = {}
    seen: set = set()

    def record(pos_key: PositionKey, r: int):
        if (pos_key, r) in seen or r == 0:
            return
        seen.add((pos_key, r))
        if winner == "Duplicator":
            if not dup_wins(pos_key, r):
                return
            for move in elem_moves:
                for ans in _answers(m, n, move):
                    nxt = pos_key | {_pair_of(move, ans)}
                    if dup_wins(nxt, r - 1):
                        strategy[(pos_key, r, ("elem",) + move)] = ans
                        record(nxt, r - 1)
                        break
            for side, s, xs in set_moves:
                for ys in _set_answers(m, n, side, s, k):
                    if all(any(dup_wins(pos_key | {_set_pair(side, x, y)}, r - 1)
                               for x in xs) for y in ys):
                        strategy[(pos_key, r, ("set", side, s, xs))] = ys
                        for y in ys:
                            for x in xs:
                                nxt = pos_key | {_set_pair(side, x, y)}
                                if dup_wins(nxt, r - 1):
                                    strategy[(pos_key, r, ("pick", side, s, xs, ys, y))] = x
                                    record(nxt, r - 1)
                                    break
                        break
        else:
            if not is_partial_isomorphism(m, n, pos_key) or dup_wins(pos_key, r):
                return
            for move in elem_moves:
                if not any(dup_wins(pos_key | {_pair_of(move, ans)}, r - 1)
                           for ans in _answers(m, n, move)):
                    strategy[(pos_key, r)] = ("elem",) + move
                    for ans in _answers(m, n, move):
                        record(pos_key | {_pair_of(move, ans)}, r - 1)
                    return
            for side, s, xs in set_moves:
                answers = _set_answers(m, n, side, s, k)
                if not any(
                    all(any(dup_wins(pos_key | {_set_pair(side, x, y)}, r - 1)
                            for x in xs) for y in ys)
                    for ys in answers
                ):
                    strategy[(pos_key, r)] = ("set", side, s, xs)
                    for ys in answers:
                        # pick the least y that defeats all of Duplicator's x's
                        for y in ys:
                            if not any(dup_wins(pos_key | {_set_pair(side, x, y)}, r - 1)
                                       for x in xs):
                                strategy[(pos_key, r, ("picky", side, s, xs, ys))] = y
                                for x in xs:
                                    record(pos_key | {_set_pair(side, x, y)}, r - 1)
                                break
                    return

    record(start, rounds)
    dup_wins.cache_clear()
    return GameResult(winner, strategy, rounds)
