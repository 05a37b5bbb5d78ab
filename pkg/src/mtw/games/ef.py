"""The n-move Ehrenfeucht-Fraisse game, back-and-forth sequences, and the
unbounded game, all solved exactly by retrograde analysis on finite
structures.

Spoiler challenges are sort-tagged (side, sort, element) and Duplicator must
answer inside the challenged sort of the other structure.  The resulting
position is kept at the id level as a set of (left, right) pairs: partial
isomorphisms are a property of the induced element map, and ids are shared
across sorts.  Positions are recorded even when they are not partial
isomorphisms; loss detection happens at evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from ..errors import BudgetExceeded, VocabularyMismatch
from ..structures import Structure
from ..syntax import Sort

DEFAULT_ROUND_BUDGET = 8

IdPair = tuple[int, int]
PositionKey = frozenset

# A Spoiler move is ("L"|"R", sort, element); a Duplicator move is the
# answering element in the other structure.
SpoilerMove = tuple[str, Sort, int]


@dataclass(frozen=True)
class Position:
    """Sort-tagged move history: tuples (sort, left, right) in play order."""
    pairs: tuple[tuple[Sort, int, int], ...] = ()

    def extended(self, sort: Sort, left: int, right: int) -> "Position":
        return Position(self.pairs + ((sort, left, right),))

    def key(self) -> PositionKey:
        return frozenset((a, b) for _s, a, b in self.pairs)


@dataclass
class GameResult:
    winner: str  # "Duplicator" | "Spoiler"
    strategy: dict
    rounds: int


@dataclass
class BackAndForthSequence:
    """Levels I_0 >= I_1 >= ... >= I_n of sets of positions; members of
    I_{i+1} extend into I_i against every single-element challenge."""
    levels: list[set[PositionKey]]


def _check_vocabulary(m: Structure, n: Structure):
    if m.voc != n.voc:
        raise VocabularyMismatch("game requires equal vocabularies")
    if m.voc.functions:
        raise VocabularyMismatch("game requires a relational-or-constant vocabulary")


def is_partial_isomorphism(m: Structure, n: Structure, idpairs) -> bool:
    """Do the id pairs (with all constant pairs adjoined) define a partial
    isomorphism between m and n?"""
    mapping: dict[int, int] = {}
    inverse: dict[int, int] = {}
    all_pairs = list(idpairs) + [
        (m.constants[c], n.constants[c]) for c in m.voc.constants]
    for a, b in all_pairs:
        if mapping.get(a, b) != b or inverse.get(b, a) != a:
            return False
        mapping[a] = b
        inverse[b] = a
    def tuples(doms, prefix=()):
        if not doms:
            yield prefix
            return
        for e in doms[0]:
            yield from tuples(doms[1:], prefix + (e,))

    for r, profile in m.voc.relations.items():
        rel_m, rel_n = m.relations[r], n.relations[r]
        left = [[e for e in m.domain[s] if e in mapping] for s in profile]
        for t in tuples(left):
            if (t in rel_m) != (tuple(mapping[e] for e in t) in rel_n):
                return False
        right = [[e for e in n.domain[s] if e in inverse] for s in profile]
        for u in tuples(right):
            if (u in rel_n) != (tuple(inverse[e] for e in u) in rel_m):
                return False
    return True


def _spoiler_moves(m: Structure, n: Structure) -> list[SpoilerMove]:
    moves: list[SpoilerMove] = []
    for side, struct in (("L", m), ("R", n)):
        for s in sorted(struct.voc.sorts):
            for e in struct.domain[s]:
                moves.append((side, s, e))
    return moves


def _answers(m: Structure, n: Structure, move: SpoilerMove) -> list[int]:
    side, s, _e = move
    other = n if side == "L" else m
    return list(other.domain[s])


def _pair_of(move: SpoilerMove, answer: int) -> IdPair:
    side, _s, e = move
    return (e, answer) if side == "L" else (answer, e)


def ef_solve(m: Structure, n: Structure, rounds: int,
             budget: int = DEFAULT_ROUND_BUDGET) -> GameResult:
    """Exact winner of the n-move game, with a positional strategy witness.

    Duplicator strategy entries map (position key, rounds left, spoiler move)
    to the answering element; Spoiler entries map (position key, rounds left)
    to his challenge.  Ties go to the lexicographically least winning move.
    """
    _check_vocabulary(m, n)
    if rounds > budget:
        raise BudgetExceeded(f"{rounds} rounds exceeds budget {budget}")

    moves = _spoiler_moves(m, n)

    @lru_cache(maxsize=None)
    def dup_wins(pos_key: PositionKey, r: int) -> bool:
        if not is_partial_isomorphism(m, n, pos_key):
            return False
        if r == 0:
            return True
        for move in moves:
            if not any(dup_wins(pos_key | {_pair_of(move, ans)}, r - 1)
                       for ans in _answers(m, n, move)):
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
            for move in moves:
                for ans in _answers(m, n, move):
                    nxt = pos_key | {_pair_of(move, ans)}
                    if dup_wins(nxt, r - 1):
                        strategy[(pos_key, r, move)] = ans
                        record(nxt, r - 1)
                        break
        else:
            if is_partial_isomorphism(m, n, pos_key):
                for move in moves:
                    if not any(dup_wins(pos_key | {_pair_of(move, ans)}, r - 1)
                               for ans in _answers(m, n, move)):
                        strategy[(pos_key, r)] = move
                        for ans in _answers(m, n, move):
                            record(pos_key | {_pair_of(move, ans)}, r - 1)
                        break

    record(start, rounds)
    dup_wins.cache_clear()
    return GameResult(winner, strategy, rounds)


def verify_strategy(m: Structure, n: Structure, result: GameResult) -> bool:
    """Replay the recorded strategy against every opposing line; the declared
    winner must never reach a losing evaluation."""
    moves = _spoiler_moves(m, n)

    def replay(pos_key: PositionKey, r: int) -> bool:
        iso = is_partial_isomorphism(m, n, pos_key)
        if result.winner == "Duplicator":
            if not iso:
                return False
            if r == 0:
                return True
            for move in moves:
                ans = result.strategy.get((pos_key, r, move))
                if ans is None:
                    return False
                if not replay(pos_key | {_pair_of(move, ans)}, r - 1):
                    return False
            return True
        else:
            if not iso:
                return True
            if r == 0:
                return False
            move = result.strategy.get((pos_key, r))
            if move is None:
                return False
            return all(replay(pos_key | {_pair_of(move, ans)}, r - 1)
                       for ans in _answers(m, n, move))

    return replay(frozenset(), result.rounds)


# ---------------------------------------------------------------------------
# Back-and-forth sequences
# ---------------------------------------------------------------------------

def _partial_isos_up_to(m: Structure, n: Structure, size: int) -> list[PositionKey]:
    """All partial isomorphisms (as id-pair sets) with at most `size` pairs
    arising from sort-respecting picks."""
    pairs = sorted({(a, b)
                    for s in m.voc.sorts
                    for a in m.domain[s]
                    for b in n.domain[s]})
    found: list[PositionKey] = []
    seen: set[PositionKey] = set()

    def grow(current: PositionKey, start: int):
        if current not in seen:
            seen.add(current)
            found.append(current)
        if len(current) >= size:
            return
        for i in range(start, len(pairs)):
            candidate = current | {pairs[i]}
            if candidate in seen or len(candidate) == len(current):
                continue
            if is_partial_isomorphism(m, n, candidate):
                grow(candidate, i + 1)

    if is_partial_isomorphism(m, n, frozenset()):
        grow(frozenset(), 0)
    return found


def back_and_forth(m: Structure, n: Structure, rounds: int,
                   budget: int = DEFAULT_ROUND_BUDGET) -> Optional[BackAndForthSequence]:
    """The greatest-fixpoint back-and-forth sequence when Duplicator wins the
    n-move game: level i holds the partial isomorphisms of size <= rounds - i
    that survive i more extension rounds.  Absent when Spoiler wins."""
    _check_vocabulary(m, n)
    if rounds > budget:
        raise BudgetExceeded(f"{rounds} rounds exceeds budget {budget}")
    moves = _spoiler_moves(m, n)
    levels: list[set[PositionKey]] = [set(_partial_isos_up_to(m, n, rounds))]
    for i in range(1, rounds + 1):
        prev = levels[-1]
        level: set[PositionKey] = set()
        for p in prev:
            if len(p) > rounds - i:
                continue
            if all(any((p | {_pair_of(mv, ans)}) in prev
                       for ans in _answers(m, n, mv)) for mv in moves):
                level.add(p)
        levels.append(level)
    if frozenset() not in levels[rounds]:
        return None
    return BackAndForthSequence(levels)


def check_back_and_forth(m: Structure, n: Structure,
                         seq: BackAndForthSequence) -> bool:
    """Level-wise validity: inclusions, partial isomorphisms, extension."""
    moves = _spoiler_moves(m, n)
    for i, level in enumerate(seq.levels):
        for p in level:
            if not is_partial_isomorphism(m, n, p):
                return False
        if i + 1 < len(seq.levels):
            nxt = seq.levels[i + 1]
            if not nxt <= level:
                return False
            for p in nxt:
                for mv in moves:
                    if not any((p | {_pair_of(mv, ans)}) in level
                               for ans in _answers(m, n, mv)):
                        return False
    return True


# ---------------------------------------------------------------------------
# The unbounded game
# ---------------------------------------------------------------------------

def ef_unbounded(m: Structure, n: Structure) -> GameResult:
    """Winner of the omega-move game on finite structures: Duplicator wins
    iff a nonempty family of partial isomorphisms with the full back-and-forth
    property exists (greatest fixpoint).  On finite structures this coincides
    with the existence of an isomorphism."""
    _check_vocabulary(m, n)
    max_size = min(len({e for d in m.domain.values() for e in d}),
                   len({e for d in n.domain.values() for e in d}))
    all_isos = _partial_isos_up_to(m, n, max_size)
    family = set(all_isos)
    moves = _spoiler_moves(m, n)
    killed: dict[PositionKey, SpoilerMove] = {}
    changed = True
    while changed:
        changed = False
        for p in list(family):
            for mv in moves:
                if not any((p | {_pair_of(mv, ans)}) in family
                           for ans in _answers(m, n, mv)):
                    family.discard(p)
                    killed[p] = mv
                    changed = True
                    break
    winner = "Duplicator" if frozenset() in family else "Spoiler"
    strategy: dict = {}
    if winner == "Duplicator":
        for p in family:
            for mv in moves:
                for ans in _answers(m, n, mv):
                    if (p | {_pair_of(mv, ans)}) in family:
                        strategy[(p, mv)] = ans
                        break
    else:
        strategy = dict(killed)
    return GameResult(winner, strategy, 0)
