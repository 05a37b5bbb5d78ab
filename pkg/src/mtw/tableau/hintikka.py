"""Downward-saturated sentence sets and their canonical quotient models.

The nine conditions are checked over the set's own constant pools and terms:
universally quantified conditions range over the declared witness pools, and
substitution instances are in scope when they stay inside the set's term
universe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..errors import HintikkaViolation
from ..structures import Structure
from ..syntax import (
    And, App, Atom, Bottom, Const, Eq, Exists, Forall, Formula, Not, Or, Qaleph,
    Qge, Sort, Term, Top, Var, Vocabulary, format_formula, format_term,
    is_atomic, dual_negation, substitute_var, vocabulary,
)


@dataclass
class HintikkaSet:
    sentences: frozenset[Formula]
    witnesses: dict[Sort, tuple[str, ...]]  # per sort, the constant pool used

    def __post_init__(self):
        self.sentences = frozenset(self.sentences)
        self.witnesses = {s: tuple(cs) for s, cs in self.witnesses.items()}

    def pool_names(self) -> set[str]:
        return {c for cs in self.witnesses.values() for c in cs}


@dataclass(frozen=True)
class Violation:
    condition: int
    witness: str


def _subterms_of_term(t: Term) -> Iterable[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from _subterms_of_term(a)


def _terms_of(f: Formula) -> Iterable[Term]:
    from ..syntax import subterms
    for t in subterms(f):
        yield from _subterms_of_term(t)


def _ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, App):
        return all(_ground(a) for a in t.args)
    return True


def _replace_one(f: Formula, old: Term, new: Term) -> list[Formula]:
    """All results of replacing exactly one occurrence of `old` by `new` in an
    atomic formula."""
    results = []

    def term_variants(t: Term) -> list[tuple[Term, bool]]:
        out = []
        if t == old:
            out.append((new, True))
        if isinstance(t, App):
            for i, a in enumerate(t.args):
                for sub, changed in term_variants(a):
                    if changed:
                        out.append((App(t.fn, t.args[:i] + (sub,) + t.args[i + 1:],
                                        t.sort), True))
        return out

    if isinstance(f, Atom):
        for i, a in enumerate(f.args):
            for sub, changed in term_variants(a):
                if changed:
                    results.append(Atom(f.rel, f.args[:i] + (sub,) + f.args[i + 1:]))
    elif isinstance(f, Eq):
        for sub, _c in term_variants(f.left):
            results.append(Eq(sub, f.right))
        for sub, _c in term_variants(f.right):
            results.append(Eq(f.left, sub))
    return results


def check_hintikka(h: HintikkaSet) -> list[Violation]:
    """Empty iff the nine closure conditions hold over h's own pools and
    terms; each violation names its condition and a witness."""
    sentences = h.sentences
    violations: list[Violation] = []
    terms: set[Term] = set()
    for f in sentences:
        terms.update(t for t in _terms_of(f) if _ground(t))
    pool_consts: dict[Sort, list[Const]] = {
        s: [Const(c, s) for c in cs] for s, cs in h.witnesses.items()}
    pool_names = h.pool_names()

    def note(cond: int, witness: str):
        violations.append(Violation(cond, witness))

    # 1: t=t for every term of the set
    for t in sorted(terms, key=format_term):
        if Eq(t, t) not in sentences:
            note(1, f"{format_term(t)} = {format_term(t)} missing")

    # 2: substitution closure inside the term universe
    equations = [f for f in sentences if isinstance(f, Eq)]
    atoms = [f for f in sentences if isinstance(f, (Atom, Eq))]
    for eq in equations:
        for f in atoms:
            for g in _replace_one(f, eq.left, eq.right):
                if any(t not in terms for t in _terms_of(g)):
                    continue
                if g not in sentences:
                    note(2, f"{format_formula(g)} missing "
                            f"(from {format_formula(f)} and {format_formula(eq)})")

    # 3: dual of every negation
    for f in sentences:
        if isinstance(f, Not) and not is_atomic(f.body):
            if dual_negation(f.body) not in sentences:
                note(3, f"dual of {format_formula(f)} missing")

    # 4 / 5: disjunctions pick a member, conjunctions keep all
    for f in sentences:
        if isinstance(f, Or) and not any(g in sentences for g in f.items):
            note(4, f"no disjunct of {format_formula(f)} present")
        if isinstance(f, And):
            for g in f.items:
                if g not in sentences:
                    note(5, f"conjunct {format_formula(g)} missing")

    # 6 / 7: witnesses and full instantiation over the pools
    for f in sentences:
        if isinstance(f, Exists):
            pool = pool_consts.get(f.sort, [])
            if not any(substitute_var(f.body, f.var, c) in sentences for c in pool):
                note(6, f"no witness for {format_formula(f)}")
        if isinstance(f, Forall):
            for c in pool_consts.get(f.sort, []):
                if substitute_var(f.body, f.var, c) not in sentences:
                    note(7, f"{format_formula(f)} not instantiated at {c.name}")

    # 8: every term is named by a pool constant
    for t in sorted(terms, key=format_term):
        if isinstance(t, Const) and t.name in pool_names:
            continue
        sort = t.sort
        named = any(Eq(t, c) in sentences or Eq(c, t) in sentences
                    for c in pool_consts.get(sort, []))
        if not named:
            note(8, f"term {format_term(t)} has no pool name")

    # 9: atomic consistency
    for f in sentences:
        if is_atomic(f) and Not(f) in sentences:
            note(9, f"{format_formula(f)} and its negation both present")

    return violations


# ---------------------------------------------------------------------------
# Term model
# ---------------------------------------------------------------------------

class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _congruence_classes(terms: set[Term], equations: list[Eq]):
    """Union-find closure of the equations over the given terms plus the
    function applications they generate, with congruence propagation."""
    keys = {t: format_term(t) for t in terms}
    uf = _UnionFind()
    for t in terms:
        uf.find(keys[t])
    for eq in equations:
        if eq.left in keys and eq.right in keys:
            uf.union(keys[eq.left], keys[eq.right])
    changed = True
    apps = [t for t in terms if isinstance(t, App)]
    while changed:
        changed = False
        for t1 in apps:
            for t2 in apps:
                if t1.fn == t2.fn and len(t1.args) == len(t2.args):
                    if uf.find(keys[t1]) != uf.find(keys[t2]):
                        if all(uf.find(keys[a]) == uf.find(keys[b])
                               for a, b in zip(t1.args, t2.args)):
                            uf.union(keys[t1], keys[t2])
                            changed = True
    return uf, keys


def term_model(h: HintikkaSet) -> Structure:
    """The quotient model: constants modulo provable equality, relations and
    functions read off the set.  Raises when the conditions fail or a
    function cannot be made total on the quotient."""
    violations = check_hintikka(h)
    if violations:
        raise HintikkaViolation(violations)

    sentences = h.sentences
    terms: set[Term] = set()
    for f in sentences:
        terms.update(t for t in _terms_of(f) if _ground(t))
    equations = [f for f in sentences if isinstance(f, Eq)]
    voc_parts = [vocabulary(f) for f in sentences]
    voc = Vocabulary(sorts=frozenset(h.witnesses))
    for v in voc_parts:
        voc = voc.union(v)
    pool_names = h.pool_names()
    # the pool constants are scaffolding, not vocabulary
    base_voc = Vocabulary(
        sorts=voc.sorts | frozenset(h.witnesses),
        relations=voc.relations,
        functions=voc.functions,
        constants={c: s for c, s in voc.constants.items() if c not in pool_names},
    )

    uf, keys = _congruence_classes(terms, equations)

    # domain: classes of used pool constants, numbered per sort
    class_ids: dict[str, int] = {}
    domain: dict[Sort, list[int]] = {s: [] for s in base_voc.sorts}
    next_id = 0
    for s in sorted(h.witnesses):
        for c in h.witnesses[s]:
            root = uf.find(format_term(Const(c, s)))
            if root not in class_ids:
                class_ids[root] = next_id
                next_id += 1
            if class_ids[root] not in domain[s]:
                domain[s].append(class_ids[root])
    for s in base_voc.sorts:
        if not domain[s]:
            raise HintikkaViolation(
                [Violation(8, f"sort {s} has no named elements")])

    def class_of(t: Term) -> Optional[int]:
        root = uf.find(keys.get(t, format_term(t)))
        return class_ids.get(root)

    relations = {r: set() for r in base_voc.relations}
    for f in sentences:
        if isinstance(f, Atom):
            ids = tuple(class_of(t) for t in f.args)
            if all(i is not None for i in ids):
                relations[f.rel].add(ids)

    functions = {}
    for fn, (argsorts, res) in base_voc.functions.items():
        table = {}
        for combo in itertools.product(*(domain[s] for s in argsorts)):
            value = None
            # look for an application congruent to representatives of the combo
            for t in terms:
                if isinstance(t, App) and t.fn == fn:
                    if tuple(class_of(a) for a in t.args) == combo:
                        value = class_of(t)
                        break
            if value is None:
                raise HintikkaViolation(
                    [Violation(8, f"{fn} has no value on classes {combo}")])
            table[combo] = value
        functions[fn] = table

    constants = {}
    for c, s in base_voc.constants.items():
        cid = class_of(Const(c, s))
        if cid is None or cid not in domain[s]:
            raise HintikkaViolation(
                [Violation(8, f"constant {c} is not named in sort {s}")])
        constants[c] = cid

    return Structure(base_voc, {s: tuple(d) for s, d in domain.items()},
                     relations, functions, constants)
