"""The clocked promise game on finite structures.

Each round Spoiler lowers the clock and challenges with up to theta elements,
alternating sides (left structure on even rounds, right on odd).  Duplicator
colors the challenge and extends a nested partial isomorphism; the elements of
color c from round j fall due at round j + c and must by then be in the
domain (left challenges) or range (right challenges) of the current map.
Play ends after the round in which the clock value 0 was picked; Duplicator
wins iff she could make every move.

Colors above the starting clock can never fall due, so colorings are
enumerated over 0..beta only.  Challenges are taken as nonempty element sets:
repeated elements color identically, and an empty challenge only weakens
Spoiler.  Duplicator extends her map by exactly the elements falling due;
covering extra elements early is never necessary because any winning play
restricted to the due elements is still winning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product

from ..errors import BudgetExceeded, VocabularyMismatch
from ..structures import Structure
from .ef import GameResult, is_partial_isomorphism

DEFAULT_CLOCK_BUDGET = 4
DEFAULT_THETA_BUDGET = 3

# pending obligations are (side, element, rounds_until_due); g is a frozenset
# of (left, right) id pairs
State = tuple[int, int, frozenset, frozenset]  # (clock, round_index, g, pending)


@dataclass
class ShelahState:
    """Public snapshot of a play in progress."""
    clock: int
    round_index: int
    g: frozenset
    pending: frozenset = field(default_factory=frozenset)


def _challenges(struct: Structure, theta: int):
    elems = sorted({e for d in struct.domain.values() for e in d})
    out = []
    for size in range(1, min(theta, len(elems)) + 1):
        out.extend(combinations(elems, size))
    return out


def _extensions(m: Structure, n: Structure, g: frozenset,
                need_left: list[int], need_right: list[int]):
    """All ways to extend g so the given elements enter dom / ran, keeping a
    partial isomorphism."""
    gmap = dict(g)
    ginv = {b: a for a, b in g}
    need_left = [a for a in need_left if a not in gmap]
    need_right = [b for b in need_right if b not in ginv]
    left_candidates = sorted({e for d in n.domain.values() for e in d})
    right_candidates = sorted({e for d in m.domain.values() for e in d})
    results = []
    for images in product(left_candidates, repeat=len(need_left)):
        for preimages in product(right_candidates, repeat=len(need_right)):
            extension = g | {(a, b) for a, b in zip(need_left, images)} \
                          | {(a, b) for a, b in zip(preimages, need_right)}
            if is_partial_isomorphism(m, n, extension):
                results.append(frozenset(extension))
    seen = set()
    unique = []
    for ext in sorted(results, key=sorted):
        if ext not in seen:
            seen.add(ext)
            unique.append(ext)
    return unique


def shelah_solve(a: Structure, b: Structure, beta: int, theta: int,
                 clock_budget: int = DEFAULT_CLOCK_BUDGET,
                 theta_budget: int = DEFAULT_THETA_BUDGET) -> GameResult:
    """Exact winner of the clocked game with starting clock `beta` and
    challenge width `theta`."""
    if a.voc != b.voc:
        raise VocabularyMismatch("game requires equal vocabularies")
    if a.voc.functions:
        raise VocabularyMismatch("game requires a relational-or-constant vocabulary")
    if beta > clock_budget or theta > theta_budget:
        raise BudgetExceeded(f"beta={beta}, theta={theta} exceeds budget")

    colors = range(0, beta + 1)

    def duplicator_replies(state: State, challenge: tuple[int, ...]):
        """Yield (coloring, new_g, new_pending) for every coloring of the
        challenge and minimal covering extension of g."""
        clock, i, g, pending = state
        side = "L" if i % 2 == 0 else "R"
        gmap = dict(g)
        ginv = {y: x for x, y in g}
        covered = (lambda s, e: e in gmap if s == "L" else e in ginv)
        fresh = [e for e in challenge if not covered(side, e)]
        ticked = [(s, e, r - 1) for (s, e, r) in pending]
        for coloring in product(colors, repeat=len(fresh)):
            entries = ticked + [(side, e, c) for e, c in zip(fresh, coloring)]
            due_left = sorted({e for (s, e, r) in entries if r <= 0 and s == "L"})
            due_right = sorted({e for (s, e, r) in entries if r <= 0 and s == "R"})
            rest = frozenset((s, e, r) for (s, e, r) in entries if r > 0)
            for new_g in _extensions(a, b, g, due_left, due_right):
                new_map = dict(new_g)
                new_inv = {y: x for x, y in new_g}
                still = frozenset(
                    (s, e, r) for (s, e, r) in rest
                    if (e not in new_map if s == "L" else e not in new_inv))
                yield (dict(zip(fresh, coloring)), new_g, still)

    @lru_cache(maxsize=None)
    def dup_wins(state: State) -> bool:
        clock, i, g, pending = state
        if clock == 0:
            return True  # the clock cannot be lowered; play is over
        side_struct = a if i % 2 == 0 else b
        for beta_i in range(clock):
            for challenge in _challenges(side_struct, theta):
                ok = False
                for _coloring, new_g, still in duplicator_replies(state, challenge):
                    if beta_i == 0 or dup_wins((beta_i, i + 1, new_g, still)):
                        ok = True
                        break
                if not ok:
                    return False
        return True

    start: State = (beta, 0, frozenset(), frozenset())
    winner = "Duplicator" if dup_wins(start) else "Spoiler"

    strategy: dict = {}
    seen: set = set()

    def record(state: State):
        if state in seen or state[0] == 0:
            return
        seen.add(state)
        clock, i, g, pending = state
        side_struct = a if i % 2 == 0 else b
        if winner == "Duplicator":
            for beta_i in range(clock):
                for challenge in _challenges(side_struct, theta):
                    for coloring, new_g, still in duplicator_replies(state, challenge):
                        if beta_i == 0 or dup_wins((beta_i, i + 1, new_g, still)):
                            strategy[(state, beta_i, challenge)] = (
                                tuple(sorted(coloring.items())), new_g)
                            if beta_i > 0:
                                record((beta_i, i + 1, new_g, still))
                            break
        else:
            if dup_wins(state):
                return
            for beta_i in range(clock):
                for challenge in _challenges(side_struct, theta):
                    replies = list(duplicator_replies(state, challenge))
                    if not any((beta_i == 0 or dup_wins((beta_i, i + 1, ng, st)))
                               for _c, ng, st in replies):
                        strategy[state] = (beta_i, challenge)
                        for _c, ng, st in replies:
                            if beta_i > 0:
                                record((beta_i, i + 1, ng, st))
                        return

    record(start)
    dup_wins.cache_clear()
    return GameResult(winner, strategy, beta)


def verify_shelah_strategy(a: Structure, b: Structure, beta: int, theta: int,
                           result: GameResult) -> bool:
    """Replay the recorded strategy against every opposing line within the
    clock and width bounds."""
    colors = range(0, beta + 1)

    def duplicator_replies(state, challenge):
        clock, i, g, pending = state
        side = "L" if i % 2 == 0 else "R"
        gmap = dict(g)
        ginv = {y: x for x, y in g}
        covered = (lambda s, e: e in gmap if s == "L" else e in ginv)
        fresh = [e for e in challenge if not covered(side, e)]
        ticked = [(s, e, r - 1) for (s, e, r) in pending]
        for coloring in product(colors, repeat=len(fresh)):
            entries = ticked + [(side, e, c) for e, c in zip(fresh, coloring)]
            due_left = sorted({e for (s, e, r) in entries if r <= 0 and s == "L"})
            due_right = sorted({e for (s, e, r) in entries if r <= 0 and s == "R"})
            rest = frozenset((s, e, r) for (s, e, r) in entries if r > 0)
            for new_g in _extensions(a, b, g, due_left, due_right):
                new_map = dict(new_g)
                new_inv = {y: x for x, y in new_g}
                still = frozenset(
                    (s, e, r) for (s, e, r) in rest
                    if (e not in new_map if s == "L" else e not in new_inv))
                yield (dict(zip(fresh, coloring)), new_g, still)

    def replay(state) -> bool:
        clock, i, g, pending = state
        if clock == 0:
            return result.winner == "Duplicator"
        side_struct = a if i % 2 == 0 else b
        if result.winner == "Duplicator":
            for beta_i in range(clock):
                for challenge in _challenges(side_struct, theta):
                    entry = result.strategy.get((state, beta_i, challenge))
                    if entry is None:
                        return False
                    coloring_items, new_g = entry
                    match = None
                    for coloring, ng, st in duplicator_replies(state, challenge):
                        if tuple(sorted(coloring.items())) == coloring_items and ng == new_g:
                            match = (coloring, ng, st)
                            break
                    if match is None:
                        return False
                    if beta_i > 0 and not replay((beta_i, i + 1, match[1], match[2])):
                        return False
            return True
        else:
            entry = result.strategy.get(state)
            if entry is None:
                return False
            beta_i, challenge = entry
            if beta_i >= clock:
                return False
            for _c, ng, st in duplicator_replies(state, challenge):
                if beta_i == 0:
                    return False  # duplicator completed the last round
                if not replay((beta_i, i + 1, ng, st)):
                    return False
            return True

    return replay((beta, 0, frozenset(), frozenset()))
