"""Saturation prover over the nine extension rules.

Sentences live on a branch as (formula, side) pairs; the side is "L"/"R" for
split refutations (interpolant extraction) or None for plain proving.  The
agenda is FIFO; universal sentences are re-enqueued whenever the constant pool
of their sort grows; reflexivity, naming, and substitution closure fire for
the ground terms that actually appear, capped by the term-depth bound.

A closed run yields a proof tree whose rules are the condition indices 1-9; an
open saturated branch is a downward-saturated witness-complete set ready for
the quotient model construction; budget exhaustion falls back to bounded model
search, from which a saturated set is rebuilt semantically.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import UnsupportedConnective
from ..semantics import Countermodel, EntailsUpToBound, entails_bounded, satisfies
from ..structures import Structure, expand_constants
from ..syntax import (
    And, App, Atom, Bottom, Const, Eq, Exists, Forall, Formula, Not, Or, Qaleph,
    Qge, Sort, Term, Top, Var, Vocabulary, dual_negation, format_formula,
    format_term, is_atomic, substitute_var, vocabulary,
)
from .hintikka import HintikkaSet, _ground, _replace_one, _subterms_of_term, check_hintikka, term_model


@dataclass
class ProverBounds:
    term_depth: int = 3
    branch_limit: int = 400
    model_size_cap: int = 3
    step_limit: int = 40_000
    open_branch_cap: int = 24


@dataclass
class ProofStep:
    rule: int                      # condition index 1..8 that licensed it
    side: Optional[str]
    principal: Optional[Formula]   # the sentence being expanded (None for 1/8)
    added: tuple[Formula, ...]
    info: tuple = ()               # rule 6/8: introduced constant; rule 7: constant used


@dataclass
class ProofTree:
    steps: list[ProofStep]
    # leaf: clash (atom, positive side, negative side); inner: a rule-4 split
    clash: Optional[tuple[Formula, Optional[str], Optional[str]]] = None
    split: Optional[tuple[Formula, Optional[str], list["ProofTree"]]] = None


@dataclass
class Closed:
    proof: ProofTree


@dataclass
class Satisfiable:
    hintikka: HintikkaSet
    model: Structure


@dataclass
class Unknown:
    budget_report: str


TableauVerdict = Union[Closed, Satisfiable, Unknown]


def _term_depth(t: Term) -> int:
    if isinstance(t, App):
        return 1 + max(_term_depth(a) for a in t.args)
    return 0


class _Budget(Exception):
    pass


class _Branch:
    def __init__(self, bounds: ProverBounds, shared):
        self.bounds = bounds
        self.shared = shared            # mutable counters shared across branches
        self.sentences: set[tuple[Formula, Optional[str]]] = set()
        self.order: list[tuple[Formula, Optional[str]]] = []
        self.agenda: deque = deque()
        self.pool: dict[Sort, list[str]] = {}
        self.universals: list[tuple[Forall, Optional[str]]] = []
        self.terms: set[Term] = set()
        self.term_sides: dict[Term, list] = {}
        self.named: set[str] = set()    # formatted terms already pool-named
        self.clash: Optional[tuple[Formula, Optional[str], Optional[str]]] = None

    def copy(self) -> "_Branch":
        b = _Branch(self.bounds, self.shared)
        b.sentences = set(self.sentences)
        b.order = list(self.order)
        b.agenda = deque(self.agenda)
        b.pool = {s: list(cs) for s, cs in self.pool.items()}
        b.universals = list(self.universals)
        b.terms = set(self.terms)
        b.term_sides = {t: list(v) for t, v in self.term_sides.items()}
        b.named = set(self.named)
        b.clash = self.clash
        return b

    # -- constants ----------------------------------------------------------

    def fresh_constant(self, sort: Sort) -> Const:
        k = self.shared["counter"]
        self.shared["counter"] += 1
        name = f"w{k}"
        return Const(name, sort)

    def add_to_pool(self, c: Const):
        self.pool.setdefault(c.sort, [])
        if c.name not in self.pool[c.sort]:
            self.pool[c.sort].append(c.name)
            for uf, side in self.universals:
                if uf.sort == c.sort:
                    self.agenda.append(("inst", uf, side, c))
            self.agenda.append(("refl", c))

    # -- sentence addition ---------------------------------------------------

    def add(self, f: Formula, side: Optional[str]) -> bool:
        """Returns False when the branch closed."""
        key = (f, side)
        if key in self.sentences:
            return self.clash is None
        self.sentences.add(key)
        self.order.append(key)
        self.agenda.append(("expand", f, side))
        for t in _formula_ground_terms(f):
            sides = self.term_sides.setdefault(t, [])
            if side not in sides:
                sides.append(side)
            if t not in self.terms:
                self.terms.add(t)
                self.agenda.append(("refl", t))
                self.agenda.append(("name", t))
        if isinstance(f, Bottom):
            self.clash = (f, side, side)
            return False
        if is_atomic(f) or (isinstance(f, Not) and is_atomic(f.body)):
            self.agenda.append(("subst_with", f, side))
            dualled = f.body if isinstance(f, Not) else Not(f)
            for other_side in ("L", "R", None):
                if (dualled, other_side) in self.sentences:
                    atom = f.body if isinstance(f, Not) else f
                    pos_side = other_side if isinstance(f, Not) else side
                    neg_side = side if isinstance(f, Not) else other_side
                    self.clash = (atom, pos_side, neg_side)
                    return False
        return True

    def has(self, f: Formula) -> bool:
        return any((f, s) in self.sentences for s in ("L", "R", None))


_GROUND_TERM_CACHE: dict = {}


def _formula_ground_terms(f: Formula) -> set[Term]:
    cached = _GROUND_TERM_CACHE.get(f)
    if cached is not None:
        return cached
    from ..syntax import subterms
    out = set()
    for t in subterms(f):
        for sub in _subterms_of_term(t):
            if _ground(sub):
                out.add(sub)
    if len(_GROUND_TERM_CACHE) > 100_000:
        _GROUND_TERM_CACHE.clear()
    _GROUND_TERM_CACHE[f] = out
    return out


def _check_supported(f: Formula):
    if isinstance(f, (Qge, Qaleph)):
        raise UnsupportedConnective(
            "threshold/symbolic quantifiers are not tableau connectives")
    if isinstance(f, Not):
        _check_supported(f.body)
    elif isinstance(f, (And, Or)):
        for g in f.items:
            _check_supported(g)
    elif isinstance(f, (Forall, Exists)):
        _check_supported(f.body)


def _expand(branch: _Branch) -> tuple[Optional[ProofTree], list[_Branch]]:
    """Run the agenda; returns (closed proof, []) or (None, open branches)."""
    bounds = branch.bounds
    steps: list[ProofStep] = []

    def closed_here() -> ProofTree:
        return ProofTree(steps, clash=branch.clash)

    while branch.agenda:
        branch.shared["steps"] += 1
        if branch.shared["steps"] > bounds.step_limit:
            raise _Budget()
        task = branch.agenda.popleft()
        kind = task[0]

        if kind == "refl":
            t = task[1]
            eq = Eq(t, t)
            for side in _term_sides(branch, t):
                if (eq, side) not in branch.sentences:
                    steps.append(ProofStep(1, side, None, (eq,), (format_term(t),)))
                    if not branch.add(eq, side):
                        return closed_here(), []
            continue

        if kind == "name":
            t = task[1]
            key = format_term(t)
            if key in branch.named:
                continue
            if isinstance(t, Const) and any(
                    t.name in cs for cs in branch.pool.values()):
                branch.named.add(key)
                continue
            if _term_depth(t) > bounds.term_depth:
                continue
            branch.named.add(key)
            c = branch.fresh_constant(t.sort)
            eq = Eq(t, c)
            side = next(iter(_term_sides(branch, t)), None)
            steps.append(ProofStep(8, side, None, (eq,), (c.name,)))
            branch.add_to_pool(c)
            if not branch.add(eq, side):
                return closed_here(), []
            continue

        if kind == "inst":
            _k, uf, side, c = task
            inst = substitute_var(uf.body, uf.var, c)
            if (inst, side) not in branch.sentences:
                steps.append(ProofStep(7, side, uf, (inst,), (c.name,)))
                if not branch.add(inst, side):
                    return closed_here(), []
            continue

        if kind == "subst_with":
            _k, f, side = task
            derived = _substitutions(branch, f, side)
            for src, eq, g in derived:
                if (g, side) not in branch.sentences:
                    steps.append(ProofStep(2, side, src, (g,), (eq,)))
                    if not branch.add(g, side):
                        return closed_here(), []
            continue

        if kind == "expand":
            _k, f, side = task
            if isinstance(f, (Atom, Eq, Top)):
                continue
            if isinstance(f, Bottom):
                return closed_here(), []
            if isinstance(f, Not):
                if is_atomic(f.body):
                    continue
                dual = dual_negation(f.body)
                if (dual, side) not in branch.sentences:
                    steps.append(ProofStep(3, side, f, (dual,)))
                    if not branch.add(dual, side):
                        return closed_here(), []
                continue
            if isinstance(f, And):
                fresh = [g for g in f.items if (g, side) not in branch.sentences]
                if fresh:
                    steps.append(ProofStep(5, side, f, tuple(fresh)))
                    for g in fresh:
                        if not branch.add(g, side):
                            return closed_here(), []
                continue
            if isinstance(f, Exists):
                if any(_witnesses(branch, f, side)):
                    continue
                c = branch.fresh_constant(f.sort)
                inst = substitute_var(f.body, f.var, c)
                steps.append(ProofStep(6, side, f, (inst,), (c.name,)))
                branch.add_to_pool(c)
                if not branch.add(inst, side):
                    return closed_here(), []
                continue
            if isinstance(f, Forall):
                branch.universals.append((f, side))
                branch.pool.setdefault(f.sort, [])
                if not branch.pool[f.sort]:
                    c = branch.fresh_constant(f.sort)
                    steps.append(ProofStep(6, side, None, (), (c.name, "seed", f.sort)))
                    branch.add_to_pool(c)
                else:
                    for name in list(branch.pool[f.sort]):
                        branch.agenda.append(("inst", f, side, Const(name, f.sort)))
                continue
            if isinstance(f, Or):
                # regularity: a disjunct already present makes this a no-op
                if any((g, side) in branch.sentences for g in f.items):
                    continue
                branch.shared["branches"] += len(f.items) - 1
                if branch.shared["branches"] > bounds.branch_limit:
                    raise _Budget()
                children: list[ProofTree] = []
                open_branches: list[_Branch] = []
                for g in f.items:
                    child = branch.copy()
                    if not child.add(g, side):
                        children.append(ProofTree([], clash=child.clash))
                        continue
                    sub_proof, sub_open = _expand(child)
                    if sub_proof is not None:
                        children.append(sub_proof)
                    else:
                        open_branches.extend(sub_open)
                        if len(open_branches) >= bounds.open_branch_cap:
                            return None, open_branches
                if open_branches:
                    return None, open_branches
                return ProofTree(steps, split=(f, side, children)), []
            raise UnsupportedConnective(f"cannot expand {format_formula(f)}")

    return None, [branch]


def _term_sides(branch: _Branch, t: Term):
    """Sides on which the term occurs; used to keep bookkeeping per side."""
    return branch.term_sides.get(t) or [None]


def _witnesses(branch: _Branch, f: Exists, side):
    for name in branch.pool.get(f.sort, []):
        inst = substitute_var(f.body, f.var, Const(name, f.sort))
        if (inst, side) in branch.sentences:
            yield name


def _substitutions(branch: _Branch, f: Formula, side):
    """Single-occurrence substitutions staying inside the branch's term set,
    using same-side equations, both from f (if atomic) with all equations and
    from all same-side atoms if f is an equation."""
    out = []
    atoms = [g for g, s in branch.order
             if s == side and isinstance(g, (Atom, Eq))]
    equations = [g for g in atoms if isinstance(g, Eq)]
    sources = []
    if isinstance(f, (Atom, Eq)):
        sources.extend((f, eq) for eq in equations)
    if isinstance(f, Eq):
        sources.extend((g, f) for g in atoms)
        sources.append((f, f))
    results = set()
    for src, eq in sources:
        for direction in ((eq.left, eq.right), (eq.right, eq.left)):
            for g in _replace_one(src, *direction):
                if g in results:
                    continue
                if all(t in branch.terms or _term_depth(t) <= branch.bounds.term_depth
                       for t in _formula_ground_terms(g)):
                    results.add(g)
                    out.append((src, eq, g))
    return out


def prove(gamma: list[Formula], bounds: Optional[ProverBounds] = None,
          sides: Optional[list[Optional[str]]] = None) -> TableauVerdict:
    """Refute or satisfy a list of closed sentences.

    Returns a replayable proof when every branch closes; an open saturated
    branch becomes a witness-complete set with its quotient model; if the
    agenda budget runs out, bounded model search takes over, and only when
    that is also exhausted is the verdict Unknown.
    """
    bounds = bounds or ProverBounds()
    for f in gamma:
        _check_supported(f)
    shared = {"counter": 0, "branches": 1, "steps": 0}
    root = _Branch(bounds, shared)
    used_names = set()
    for f in gamma:
        used_names |= vocabulary(f).symbols()
    while f"w{shared['counter']}" in used_names:
        shared["counter"] += 1

    # seed every sort mentioned anywhere with one constant
    sorts = set()
    for f in gamma:
        sorts |= vocabulary(f).sorts
    budget_hit = False
    proof: Optional[ProofTree] = None
    open_branches: list[_Branch] = []
    seed_steps: list[ProofStep] = []
    try:
        for s in sorted(sorts):
            c = root.fresh_constant(s)
            seed_steps.append(ProofStep(6, None, None, (), (c.name, "seed", s)))
            root.add_to_pool(c)
        ok = True
        for f, side in zip(gamma, sides or [None] * len(gamma)):
            if not root.add(f, side):
                ok = False
                break
        if not ok:
            proof = ProofTree([], clash=root.clash)
        else:
            proof, open_branches = _expand(root)
    except _Budget:
        budget_hit = True

    if proof is not None:
        proof.steps[:0] = seed_steps
        return Closed(proof)

    for b in open_branches:
        h = _hintikka_from_branch(b)
        try:
            model = term_model(h)
        except Exception:
            continue
        if all(satisfies(model, f) for f in gamma):
            return Satisfiable(h, model)

    # bounded model search
    verdict = entails_bounded(list(gamma), Bottom(), bounds.model_size_cap)
    if isinstance(verdict, Countermodel):
        model = verdict.structure
        h = hintikka_from_model(model, gamma)
        return Satisfiable(h, model)
    report = (f"saturation {'exhausted budget' if budget_hit else 'inconclusive'} "
              f"(steps={shared['steps']}, branches={shared['branches']}); "
              f"no model up to size {bounds.model_size_cap}")
    return Unknown(report)


def _hintikka_from_branch(b: _Branch) -> HintikkaSet:
    sentences = frozenset(f for f, _s in b.sentences)
    witnesses = {s: tuple(cs) for s, cs in b.pool.items() if cs}
    return HintikkaSet(sentences, witnesses)


def hintikka_from_model(model: Structure, gamma: list[Formula]) -> HintikkaSet:
    """Build a witness-complete saturated set directly from the sentences true
    in a model, naming every element with a fresh constant."""
    base_names = model.voc.symbols()
    pool: dict[Sort, dict[int, str]] = {}
    counter = itertools.count()
    picks = []
    for s in sorted(model.voc.sorts):
        pool[s] = {}
        for e in model.domain[s]:
            name = f"w{next(counter)}"
            while name in base_names:
                name = f"w{next(counter)}"
            pool[s][e] = name
            picks.append((name, s, e))
    expanded = expand_constants(model, picks)

    sentences: set[Formula] = set()

    def value(t: Term) -> int:
        if isinstance(t, Const):
            return expanded.constants[t.name]
        return expanded.functions[t.fn][tuple(value(a) for a in t.args)]

    def close(f: Formula):
        if f in sentences:
            return
        sentences.add(f)
        if isinstance(f, (Atom, Eq, Top, Bottom)):
            return
        if isinstance(f, Not):
            if is_atomic(f.body):
                return
            close(dual_negation(f.body))
            return
        if isinstance(f, And):
            for g in f.items:
                close(g)
            return
        if isinstance(f, Or):
            for g in f.items:
                if satisfies(expanded, g):
                    close(g)
                    return
            return
        if isinstance(f, Exists):
            for e in expanded.domain[f.sort]:
                inst = substitute_var(f.body, f.var, Const(pool[f.sort][e], f.sort))
                if satisfies(expanded, inst):
                    close(inst)
                    return
            return
        if isinstance(f, Forall):
            for e in expanded.domain[f.sort]:
                close(substitute_var(f.body, f.var, Const(pool[f.sort][e], f.sort)))
            return
        raise UnsupportedConnective(format_formula(f))

    for f in gamma:
        close(f)

    # ground terms of the closure, their reflexivities and pool namings
    terms: set[Term] = set()
    for f in list(sentences):
        terms |= _formula_ground_terms(f)
    for s in pool:
        for e, name in pool[s].items():
            terms.add(Const(name, s))
    for t in terms:
        sentences.add(Eq(t, t))
        sentences.add(Eq(t, Const(pool[t.sort][value(t)], t.sort)))

    # full positive diagram over the named terms, which closes substitution
    all_terms = sorted(terms, key=format_term)
    for r, profile in expanded.voc.relations.items():
        pools = [[t for t in all_terms if t.sort == s] for s in profile]
        for combo in itertools.product(*pools):
            if tuple(value(t) for t in combo) in expanded.relations[r]:
                sentences.add(Atom(r, tuple(combo)))
    for t1 in all_terms:
        for t2 in all_terms:
            if value(t1) == value(t2):
                sentences.add(Eq(t1, t2))

    witnesses = {s: tuple(pool[s][e] for e in sorted(pool[s])) for s in pool}
    return HintikkaSet(frozenset(sentences), witnesses)


# ---------------------------------------------------------------------------
# Proof serialization and replay
# ---------------------------------------------------------------------------

def format_proof(tree: ProofTree, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    for step in tree.steps:
        side = f" [{step.side}]" if step.side else ""
        added = "; ".join(format_formula(g) for g in step.added)
        principal = f" from {format_formula(step.principal)}" if step.principal else ""
        lines.append(f"{pad}rule {step.rule}{side}: {added}{principal}")
    if tree.clash is not None:
        atom, sa, sb = tree.clash
        lines.append(f"{pad}rule 9: clash on {format_formula(atom)}")
    if tree.split is not None:
        f, side, children = tree.split
        side_txt = f" [{side}]" if side else ""
        lines.append(f"{pad}rule 4{side_txt}: split {format_formula(f)}")
        for child in children:
            lines.append(format_proof(child, indent + 1))
    return "\n".join(lines)


def _constant_names(f: Formula) -> set[str]:
    return set(vocabulary(f).constants)


def replay_proof(gamma: list[Formula], tree: ProofTree,
                 sides: Optional[list[Optional[str]]] = None) -> bool:
    """Validate a closed proof rule-by-rule against the nine clauses:
    reflexivity terms, substitution instances, duals, conjuncts, witness
    freshness, pool membership for instantiations, naming freshness, split
    children matching the disjuncts, and atomic clashes at the leaves."""
    start = list(zip(gamma, sides or [None] * len(gamma)))
    base_used = set()
    for f, _s in start:
        base_used |= _constant_names(f)

    def check(tree: ProofTree, have: set, pool: dict, used: set) -> bool:
        have = set(have)
        pool = {s: set(cs) for s, cs in pool.items()}
        used = set(used)
        for step in tree.steps:
            f = step.principal
            ok = False
            if step.rule == 1:
                ok = all(isinstance(g, Eq) and g.left == g.right for g in step.added)
            elif step.rule == 2:
                eq = step.info[0] if step.info else None
                if (isinstance(eq, Eq) and (f, step.side) in have
                        and any((eq, s) in have for s in (step.side,))):
                    candidates = set(_replace_one(f, eq.left, eq.right)
                                     + _replace_one(f, eq.right, eq.left))
                    ok = all(g in candidates for g in step.added)
            elif step.rule == 3:
                ok = ((f, step.side) in have and isinstance(f, Not)
                      and step.added == (dual_negation(f.body),))
            elif step.rule == 5:
                ok = ((f, step.side) in have and isinstance(f, And)
                      and all(g in f.items for g in step.added))
            elif step.rule == 6:
                if f is None:  # pool seeding for an inhabited sort
                    name, tag, sort = step.info
                    ok = tag == "seed" and name not in used
                    pool.setdefault(sort, set()).add(name)
                    used.add(name)
                else:
                    c = step.info[0]
                    ok = ((f, step.side) in have and isinstance(f, Exists)
                          and c not in used
                          and step.added == (substitute_var(f.body, f.var,
                                                            Const(c, f.sort)),))
                    pool.setdefault(f.sort, set()).add(c)
                    used.add(c)
            elif step.rule == 7:
                c = step.info[0]
                ok = ((f, step.side) in have and isinstance(f, Forall)
                      and c in pool.get(f.sort, set())
                      and step.added == (substitute_var(f.body, f.var,
                                                        Const(c, f.sort)),))
            elif step.rule == 8:
                if len(step.added) == 1 and isinstance(step.added[0], Eq):
                    eq = step.added[0]
                    name = step.info[0]
                    ok = (isinstance(eq.right, Const) and eq.right.name == name
                          and name not in used)
                    pool.setdefault(eq.right.sort, set()).add(name)
                    used.add(name)
            if not ok:
                return False
            for g in step.added:
                have.add((g, step.side))
                used |= _constant_names(g)
        if tree.clash is not None:
            atom, sa, sb = tree.clash
            if isinstance(atom, Bottom):
                return any((atom, s) in have for s in (sa, sb, None))
            return (is_atomic(atom) and (atom, sa) in have
                    and (Not(atom), sb) in have)
        if tree.split is not None:
            f, side, children = tree.split
            if not isinstance(f, Or) or (f, side) not in have:
                return False
            if len(children) != len(f.items):
                return False
            for g, child in zip(f.items, children):
                if not check(child, have | {(g, side)}, pool, used):
                    return False
            return True
        return False  # neither clash nor split: not a closed tree

    return check(tree, set(start), {}, base_used)
