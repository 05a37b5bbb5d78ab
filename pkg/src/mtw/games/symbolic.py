"""The cardinal set-move game on symbolic equivalence structures.

Elements are named lazily as (group, class tag, element tag) triples; the
position pairs named elements across the two structures and is checked as a
partial isomorphism of the induced finite quotient (paired elements must agree
on same-class relations).

Set moves are abstracted.  A set is described by the parts it draws on:
("rem", g, c) for the unnamed remainder of a named class, and ("uns", g) for
the union of unnamed classes of a group.  Named elements add nothing to a
set's symbolic cardinality and only widen the opponent-facing single pick, so
each player restricts to inclusion-minimal legal part sets: shrinking
Spoiler's X only shrinks Duplicator's final picks, and shrinking Duplicator's
Y only shrinks Spoiler's picks, so exactness is preserved.  A part set is
legal when its symbolic size reaches the aleph threshold.

Element moves that re-pick an already named element are skipped: the answer
that keeps Duplicator alive is forced to the existing partner, so the round
is wasted, and the game value is monotone in the number of rounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from ..errors import BudgetExceeded
from ..structures import SymCard, SymbolicEqStructure, ZERO, sym_sum
from .ef import GameResult

DEFAULT_SYMBOLIC_BUDGET = 4

ElemRef = tuple[int, int, int]  # (group, class tag, element tag)
PairT = tuple[ElemRef, ElemRef]
Pairing = tuple[PairT, ...]

# element-move descriptors
#   ("in_class", g, c)  fresh element of the named class (g, c)
#   ("new_class", g)    fresh element of a fresh class of group g
# set parts
#   ("rem", g, c)       the unnamed remainder of named class (g, c)
#   ("uns", g)          all unnamed classes of group g


@dataclass(frozen=True)
class SymPosition:
    """Pairing of named elements; names are (group, classTag, elementTag)."""
    pairs: Pairing = ()

    def key(self) -> Pairing:
        return _canon(self.pairs)


def _canon(pairs: Pairing) -> Pairing:
    """Relabel class and element tags by first appearance so that positions
    differing only in tag allocation share a key."""
    out = []
    remap_class: dict = {}
    remap_elem: dict = {}
    for left, right in sorted(pairs):
        new = []
        for side, (g, c, e) in (("L", left), ("R", right)):
            ckey = (side, g, c)
            if ckey not in remap_class:
                remap_class[ckey] = len([k for k in remap_class if k[0] == side and k[1] == g])
            c2 = remap_class[ckey]
            ekey = (side, g, c, e)
            if ekey not in remap_elem:
                remap_elem[ekey] = len([k for k in remap_elem
                                        if k[0] == side and k[1] == g and k[2] == c])
            new.append((g, c2, remap_elem[ekey]))
        out.append((new[0], new[1]))
    return tuple(sorted(out))


def _consistent(pairs: Pairing) -> bool:
    """Partial isomorphism of the quotient: same-class on the left iff
    same-class on the right, and no element is paired twice."""
    lefts = [l for l, _ in pairs]
    rights = [r for _, r in pairs]
    if len(set(lefts)) != len(lefts) or len(set(rights)) != len(rights):
        return False
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            (l1, r1), (l2, r2) = pairs[i], pairs[j]
            if (l1[:2] == l2[:2]) != (r1[:2] == r2[:2]):
                return False
    return True


class _Side:
    """Derived bookkeeping for one structure relative to a pairing."""

    def __init__(self, struct: SymbolicEqStructure, refs: list[ElemRef]):
        self.struct = struct
        self.named: dict[tuple[int, int], int] = {}
        for g, c, _e in refs:
            self.named[(g, c)] = self.named.get((g, c), 0) + 1
        self.classes_named: dict[int, int] = {}
        for (g, _c) in self.named:
            self.classes_named[g] = self.classes_named.get(g, 0) + 1

    def class_remainder(self, g: int, c: int) -> SymCard:
        size = self.struct.groups[g][1]
        used = self.named.get((g, c), 0)
        if size.is_finite:
            return SymCard.fin(max(0, size.value - used))
        return size

    def classes_remaining(self, g: int) -> SymCard:
        num = self.struct.groups[g][0]
        used = self.classes_named.get(g, 0)
        if num.is_finite:
            return SymCard.fin(max(0, num.value - used))
        return num

    def element_moves(self) -> list:
        moves = []
        for (g, c) in sorted(self.named):
            if self.class_remainder(g, c) > ZERO:
                moves.append(("in_class", g, c))
        for g in range(len(self.struct.groups)):
            if self.classes_remaining(g) > ZERO:
                moves.append(("new_class", g))
        return moves

    def parts(self) -> list[tuple[tuple, SymCard]]:
        out = []
        for (g, c) in sorted(self.named):
            rem = self.class_remainder(g, c)
            if rem > ZERO:
                out.append((("rem", g, c), rem))
        for g in range(len(self.struct.groups)):
            n = self.classes_remaining(g)
            if n > ZERO:
                out.append((("uns", g), n * self.struct.groups[g][1]))
        return out

    def minimal_legal_sets(self, threshold: SymCard) -> list[tuple]:
        parts = self.parts()
        legal: list[tuple] = []
        for size in range(1, len(parts) + 1):
            for combo in combinations(parts, size):
                names = tuple(p for p, _v in combo)
                if sym_sum(v for _p, v in combo) >= threshold:
                    if not any(set(prev) <= set(names) for prev in legal):
                        legal.append(names)
        return legal

    def realize(self, move, refs: list[ElemRef]) -> ElemRef:
        """Turn an element-move descriptor into a concrete fresh reference."""
        if move[0] == "in_class":
            _tag, g, c = move
            e = max([r[2] for r in refs if r[:2] == (g, c)], default=-1) + 1
            return (g, c, e)
        _tag, g = move
        c = max([r[1] for r in refs if r[0] == g], default=-1) + 1
        return (g, c, 0)


def _pick_options(part) -> tuple:
    """The element-move descriptor realized by picking inside a set part."""
    if part[0] == "rem":
        return ("in_class", part[1], part[2])
    return ("new_class", part[1])


def efq_symbolic(e1: SymbolicEqStructure, e2: SymbolicEqStructure,
                 rounds: int, aleph_index: int,
                 budget: int = DEFAULT_SYMBOLIC_BUDGET) -> GameResult:
    """Exact winner over the abstracted move space, with threshold
    aleph_{aleph_index} set moves."""
    if rounds > budget:
        raise BudgetExceeded(f"{rounds} rounds exceeds budget {budget}")
    threshold = SymCard.aleph(aleph_index)
    structs = {"L": e1, "R": e2}

    def sides(pairs: Pairing) -> dict[str, _Side]:
        return {
            "L": _Side(e1, [l for l, _ in pairs]),
            "R": _Side(e2, [r for _, r in pairs]),
        }

    def extend(pairs: Pairing, side: str, move, answer_move) -> Pairing:
        ss = sides(pairs)
        ref_mv = ss[side].realize(move, [p[0 if side == "L" else 1] for p in pairs])
        other = "R" if side == "L" else "L"
        ref_ans = ss[other].realize(answer_move, [p[0 if other == "L" else 1] for p in pairs])
        pair = (ref_mv, ref_ans) if side == "L" else (ref_ans, ref_mv)
        return _canon(pairs + (pair,))

    def spoiler_options(pairs: Pairing) -> list:
        ss = sides(pairs)
        opts = []
        for side in ("L", "R"):
            for mv in ss[side].element_moves():
                opts.append(("elem", side, mv))
        for side in ("L", "R"):
            for xs in ss[side].minimal_legal_sets(threshold):
                opts.append(("set", side, xs))
        return opts

    @lru_cache(maxsize=None)
    def dup_wins(pairs: Pairing, r: int) -> bool:
        if not _consistent(pairs):
            return False
        if r == 0:
            return True
        ss = sides(pairs)
        for opt in spoiler_options(pairs):
            if opt[0] == "elem":
                _k, side, mv = opt
                other = "R" if side == "L" else "L"
                if not any(dup_wins(extend(pairs, side, mv, ans), r - 1)
                           for ans in ss[other].element_moves()):
                    return False
            else:
                _k, side, xs = opt
                other = "R" if side == "L" else "L"
                ys_options = ss[other].minimal_legal_sets(threshold)
                if not any(
                    all(any(dup_wins(extend(pairs, side, _pick_options(xp),
                                            _pick_options(yp)), r - 1)
                            for xp in xs)
                        for yp in ys)
                    for ys in ys_options
                ):
                    return False
        return True

    start: Pairing = ()
    winner = "Duplicator" if dup_wins(start, rounds) else "Spoiler"

    strategy: dict = {}
    seen: set = set()

    def record(pairs: Pairing, r: int):
        if (pairs, r) in seen or r == 0:
            return
        seen.add((pairs, r))
        ss = sides(pairs)
        if winner == "Duplicator":
            if not dup_wins(pairs, r):
                return
            for opt in spoiler_options(pairs):
                if opt[0] == "elem":
                    _k, side, mv = opt
                    other = "R" if side == "L" else "L"
                    for ans in ss[other].element_moves():
                        nxt = extend(pairs, side, mv, ans)
                        if dup_wins(nxt, r - 1):
                            strategy[(pairs, r, opt)] = ans
                            record(nxt, r - 1)
                            break
                else:
                    _k, side, xs = opt
                    other = "R" if side == "L" else "L"
                    for ys in ss[other].minimal_legal_sets(threshold):
                        if all(any(dup_wins(extend(pairs, side, _pick_options(xp),
                                                   _pick_options(yp)), r - 1)
                                   for xp in xs) for yp in ys):
                            strategy[(pairs, r, opt)] = ys
                            for yp in ys:
                                for xp in xs:
                                    nxt = extend(pairs, side, _pick_options(xp),
                                                 _pick_options(yp))
                                    if dup_wins(nxt, r - 1):
                                        strategy[(pairs, r, opt, ys, yp)] = xp
                                        record(nxt, r - 1)
                                        break
                            break
        else:
            if not _consistent(pairs) or dup_wins(pairs, r):
                return
            for opt in spoiler_options(pairs):
                if opt[0] == "elem":
                    _k, side, mv = opt
                    other = "R" if side == "L" else "L"
                    if not any(dup_wins(extend(pairs, side, mv, ans), r - 1)
                               for ans in ss[other].element_moves()):
                        strategy[(pairs, r)] = opt
                        for ans in ss[other].element_moves():
                            record(extend(pairs, side, mv, ans), r - 1)
                        return
                else:
                    _k, side, xs = opt
                    other = "R" if side == "L" else "L"
                    ys_options = ss[other].minimal_legal_sets(threshold)
                    if not any(
                        all(any(dup_wins(extend(pairs, side, _pick_options(xp),
                                                _pick_options(yp)), r - 1)
                                for xp in xs) for yp in ys)
                        for ys in ys_options
                    ):
                        strategy[(pairs, r)] = opt
                        for ys in ys_options:
                            for yp in ys:
                                if not any(dup_wins(extend(pairs, side, _pick_options(xp),
                                                           _pick_options(yp)), r - 1)
                                           for xp in xs):
                                    strategy[(pairs, r, opt, ys)] = yp
                                    for xp in xs:
                                        record(extend(pairs, side, _pick_options(xp),
                                                      _pick_options(yp)), r - 1)
                                    break
                        return

    record(start, rounds)
    dup_wins.cache_clear()
    return GameResult(winner, strategy, rounds)


def verify_symbolic_strategy(e1: SymbolicEqStructure, e2: SymbolicEqStructure,
                             rounds: int, aleph_index: int,
                             result: GameResult,
                             policy=None) -> bool:
    """Replay a Duplicator strategy (the recorded one, or an explicit policy)
    against every abstracted Spoiler line."""
    if result.winner != "Duplicator" and policy is None:
        raise ValueError("only Duplicator strategies are replayed here")
    threshold = SymCard.aleph(aleph_index)

    def sides(pairs: Pairing) -> dict[str, _Side]:
        return {
            "L": _Side(e1, [l for l, _ in pairs]),
            "R": _Side(e2, [r for _, r in pairs]),
        }

    def extend(pairs: Pairing, side: str, move, answer_move) -> Pairing:
        ss = sides(pairs)
        ref_mv = ss[side].realize(move, [p[0 if side == "L" else 1] for p in pairs])
        other = "R" if side == "L" else "L"
        ref_ans = ss[other].realize(answer_move, [p[0 if other == "L" else 1] for p in pairs])
        pair = (ref_mv, ref_ans) if side == "L" else (ref_ans, ref_mv)
        return _canon(pairs + (pair,))

    def answer_elem(pairs, r, opt):
        if policy is not None:
            return policy(pairs, opt, None)
        return result.strategy.get((pairs, r, opt))

    def answer_set(pairs, r, opt):
        if policy is not None:
            return policy(pairs, opt, None)
        return result.strategy.get((pairs, r, opt))

    def answer_pick(pairs, r, opt, ys, yp):
        if policy is not None:
            return policy(pairs, opt, (ys, yp))
        return result.strategy.get((pairs, r, opt, ys, yp))

    def replay(pairs: Pairing, r: int) -> bool:
        if not _consistent(pairs):
            return False
        if r == 0:
            return True
        ss = sides(pairs)
        opts = []
        for side in ("L", "R"):
            for mv in ss[side].element_moves():
                opts.append(("elem", side, mv))
            for xs in ss[side].minimal_legal_sets(threshold):
                opts.append(("set", side, xs))
        for opt in opts:
            if opt[0] == "elem":
                ans = answer_elem(pairs, r, opt)
                if ans is None:
                    return False
                if not replay(extend(pairs, opt[1], opt[2], ans), r - 1):
                    return False
            else:
                ys = answer_set(pairs, r, opt)
                if ys is None:
                    return False
                other = "R" if opt[1] == "L" else "L"
                if sym_sum(dict(ss[other].parts())[p] for p in ys) < threshold:
                    return False
                for yp in ys:
                    xp = answer_pick(pairs, r, opt, ys, yp)
                    if xp is None or xp not in opt[2]:
                        return False
                    nxt = extend(pairs, opt[1], _pick_options(xp), _pick_options(yp))
                    if not replay(nxt, r - 1):
                        return False
        return True

    return replay((), rounds)


def matching_class_policy(e1: SymbolicEqStructure, e2: SymbolicEqStructure):
    """Duplicator policy for equivalence structures, stated structurally:
    answer a set that leaves the named classes with "everything outside the
    named classes"; answer a set inside named classes with the remainder of
    the partner class; answer element moves in the partner class or a fresh
    class; final picks mirror through the partnership."""

    def class_partner(pairs: Pairing, side_from: str, g: int, c: int):
        for left, right in pairs:
            mine, theirs = (left, right) if side_from == "L" else (right, left)
            if mine[:2] == (g, c):
                return theirs[:2]
        return None

    def policy(pairs: Pairing, opt, pick_ctx):
        if opt[0] == "elem":
            _k, side, mv = opt
            if mv[0] == "in_class":
                partner = class_partner(pairs, side, mv[1], mv[2])
                if partner is not None:
                    return ("in_class", partner[0], partner[1])
                return ("new_class", mv[1])
            return ("new_class", mv[1])
        _k, side, xs = opt
        if pick_ctx is None:
            # choose Y
            uns = [p for p in xs if p[0] == "uns"]
            if uns:
                return (("uns", uns[0][1]),)
            # X sits inside named classes; answer with the partner remainder
            g, c = xs[0][1], xs[0][2]
            partner = class_partner(pairs, side, g, c)
            return (("rem", partner[0], partner[1]),)
        # choose x in X after Spoiler picked y in our Y
        ys, yp = pick_ctx
        other = "R" if side == "L" else "L"
        if yp[0] == "uns":
            for p in xs:
                if p[0] == "uns":
                    return p
            return xs[0]
        # y landed in the remainder of a named class: mirror back
        partner = class_partner(pairs, other, yp[1], yp[2])
        for p in xs:
            if p[0] == "rem" and (p[1], p[2]) == partner:
                return p
        return xs[0]

    return policy
