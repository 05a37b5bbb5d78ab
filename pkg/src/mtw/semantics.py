"""Satisfaction, syntactic relativization, bounded entailment, and the
quantifier-rank machinery (characteristic formulas and rank partitions).

Bounded entailment is a surrogate for the undecidable unbounded relation: it
exhaustively checks finite structures up to a per-sort size bound and says so
in its verdict, so callers can never mistake it for unbounded entailment.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import games
from .errors import (
    BoundTooLargeForBudget,
    BudgetExceeded,
    MultiFreeVariableGuard,
    SymbolicQuantifierOnFiniteStructure,
    UnboundVariable,
    VocabularyMismatch,
)
from .structures import Structure
from .syntax import (
    And, App, Atom, Bottom, Const, Eq, Exists, Forall, Formula, Not, Or, Qaleph,
    Qge, Sort, Term, Top, Var, Vocabulary, format_formula, free_vars, is_atomic,
    vocabulary,
)

# assignment: variable name -> (sort, element)
Assignment = Mapping[str, tuple[Sort, int]]


@dataclass(frozen=True)
class EntailsUpToBound:
    bound: Mapping[Sort, int]


@dataclass(frozen=True)
class Countermodel:
    structure: Structure
    assignment: dict


EntailmentVerdict = Union[EntailsUpToBound, Countermodel]


# ---------------------------------------------------------------------------
# Satisfaction
# ---------------------------------------------------------------------------

def _eval_term(m: Structure, t: Term, env: Mapping[str, int]) -> int:
    if isinstance(t, Var):
        if t.name not in env:
            raise UnboundVariable(t.name)
        return env[t.name]
    if isinstance(t, Const):
        return m.constants[t.name]
    return m.functions[t.fn][tuple(_eval_term(m, a, env) for a in t.args)]


def _holds(m: Structure, f: Formula, env: dict[str, int]) -> bool:
    if isinstance(f, Atom):
        return tuple(_eval_term(m, a, env) for a in f.args) in m.relations[f.rel]
    if isinstance(f, Eq):
        return _eval_term(m, f.left, env) == _eval_term(m, f.right, env)
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Not):
        return not _holds(m, f.body, env)
    if isinstance(f, And):
        return all(_holds(m, g, env) for g in f.items)
    if isinstance(f, Or):
        return any(_holds(m, g, env) for g in f.items)
    if isinstance(f, Forall):
        return all(_holds(m, f.body, {**env, f.var: e}) for e in m.domain[f.sort])
    if isinstance(f, Exists):
        return any(_holds(m, f.body, {**env, f.var: e}) for e in m.domain[f.sort])
    if isinstance(f, Qge):
        count = 0
        for e in m.domain[f.sort]:
            if _holds(m, f.body, {**env, f.var: e}):
                count += 1
                if count >= f.k:
                    return True
        return False
    raise SymbolicQuantifierOnFiniteStructure(
        "symbolic cardinality quantifiers have no finite-structure semantics")


def satisfies(m: Structure, f: Formula, asg: Optional[Assignment] = None) -> bool:
    """Standard recursive truth; Qge k counts distinct witnesses."""
    if not m.voc.contains(vocabulary(f)):
        raise VocabularyMismatch("formula vocabulary not interpreted by the structure")
    env: dict[str, int] = {}
    for name, (sort, elem) in (asg or {}).items():
        env[name] = elem
    for v in free_vars(f):
        if v.name not in env:
            raise UnboundVariable(v.name)
    return _holds(m, f, env)


# ---------------------------------------------------------------------------
# Syntactic relativization
# ---------------------------------------------------------------------------

def relativize_formula(f: Formula, guard: Formula) -> Formula:
    """Bound every quantifier of `f` by the one-free-variable guard, so that
    truth in a structure equals truth of `f` in the relativization to the
    guard's solution set (when that set is function-closed and nonempty)."""
    fv = list(free_vars(guard))
    if len(fv) != 1:
        raise MultiFreeVariableGuard(f"guard must have exactly one free variable, got {len(fv)}")
    hole = fv[0]

    def guard_at(var: str, sort: Sort) -> Formula:
        from .syntax import substitute_var
        return substitute_var(guard, hole.name, Var(var, sort))

    def walk(g: Formula) -> Formula:
        if is_atomic(g) or isinstance(g, (Top, Bottom)):
            return g
        if isinstance(g, Not):
            return Not(walk(g.body))
        if isinstance(g, And):
            return And(tuple(walk(h) for h in g.items))
        if isinstance(g, Or):
            return Or(tuple(walk(h) for h in g.items))
        if isinstance(g, Forall):
            return Forall(g.var, g.sort,
                          Or((Not(guard_at(g.var, g.sort)), walk(g.body))))
        if isinstance(g, Exists):
            return Exists(g.var, g.sort,
                          And((guard_at(g.var, g.sort), walk(g.body))))
        if isinstance(g, Qge):
            return Qge(g.k, g.var, g.sort,
                       And((guard_at(g.var, g.sort), walk(g.body))))
        return Qaleph(g.index, g.var, g.sort,
                      And((guard_at(g.var, g.sort), walk(g.body))))

    return walk(f)


# ---------------------------------------------------------------------------
# Bounded structure enumeration
# ---------------------------------------------------------------------------

def _domain_shapes(sorts: Sequence[Sort], bound: Mapping[Sort, int],
                   with_overlap: bool):
    """Yield domain maps sort -> tuple of ids.

    Without overlap, sorts get disjoint blocks of ids.  With overlap the ids
    are distributed over the nonempty sort-membership cells (Venn regions),
    which covers every overlap pattern up to isomorphism.
    """
    sorts = sorted(sorts)
    if not with_overlap or len(sorts) == 1:
        ranges = [range(1, bound[s] + 1) for s in sorts]
        for sizes in itertools.product(*ranges):
            domain = {}
            base = 0
            for s, k in zip(sorts, sizes):
                domain[s] = tuple(range(base, base + k))
                base += k
            yield domain
        return
    cells = [c for r in range(1, len(sorts) + 1)
             for c in itertools.combinations(sorts, r)]
    max_cell = max(bound.values())
    for counts in itertools.product(range(max_cell + 1), repeat=len(cells)):
        sizes = {s: sum(k for c, k in zip(cells, counts) if s in c) for s in sorts}
        if any(sizes[s] < 1 or sizes[s] > bound[s] for s in sorts):
            continue
        domain = {s: [] for s in sorts}
        base = 0
        for cell, k in zip(cells, counts):
            for e in range(base, base + k):
                for s in cell:
                    domain[s].append(e)
            base += k
        yield {s: tuple(v) for s, v in domain.items()}


def _has_cross_sort_eq(f: Formula) -> bool:
    if isinstance(f, Eq):
        return f.left.sort != f.right.sort
    if isinstance(f, Not):
        return _has_cross_sort_eq(f.body)
    if isinstance(f, (And, Or)):
        return any(_has_cross_sort_eq(g) for g in f.items)
    if isinstance(f, (Forall, Exists, Qge, Qaleph)):
        return _has_cross_sort_eq(f.body)
    return False


def enumerate_structures(voc: Vocabulary, bound: Mapping[Sort, int],
                         with_overlap: bool = False,
                         checkpoints: Mapping[str, list] = None,
                         budget: int = 50_000_000):
    """Enumerate all structures over `voc` with per-sort sizes up to `bound`,
    in a fixed deterministic order.

    `checkpoints` maps symbol names to formulas that become checkable once
    that symbol (in declaration order) has been interpreted; failing a
    checkpoint prunes the whole subtree.  The formulas must be sentences.
    """
    rel_names = sorted(voc.relations)
    fn_names = sorted(voc.functions)
    const_names = sorted(voc.constants)
    checkpoints = checkpoints or {}

    for domain in _domain_shapes(sorted(voc.sorts), bound, with_overlap):
        est = 1
        for r in rel_names:
            cells = 1
            for s in voc.relations[r]:
                cells *= len(domain[s])
            est *= 2 ** min(cells, 60)
            if est > budget:
                raise BoundTooLargeForBudget(
                    f"estimated {est} candidates exceeds budget {budget}")
        for fn in fn_names:
            argsorts, res = voc.functions[fn]
            args = 1
            for s in argsorts:
                args *= len(domain[s])
            est *= len(domain[res]) ** args
            if est > budget:
                raise BoundTooLargeForBudget(
                    f"estimated {est} candidates exceeds budget {budget}")
        for c in const_names:
            est *= len(domain[voc.constants[c]])
        if est > budget:
            raise BoundTooLargeForBudget(
                f"estimated {est} candidates exceeds budget {budget}")

        def interp_options(kind: str, name: str):
            if kind == "rel":
                cells = list(itertools.product(*(domain[s] for s in voc.relations[name])))
                for mask in range(2 ** len(cells)):
                    yield frozenset(c for i, c in enumerate(cells) if mask >> i & 1)
            elif kind == "fn":
                argsorts, res = voc.functions[name]
                args = list(itertools.product(*(domain[s] for s in argsorts)))
                for values in itertools.product(domain[res], repeat=len(args)):
                    yield dict(zip(args, values))
            else:
                yield from domain[voc.constants[name]]

        symbols = ([("const", c) for c in const_names]
                   + [("rel", r) for r in rel_names]
                   + [("fn", f) for f in fn_names])

        def assign(i: int, rels, fns, consts):
            if i == len(symbols):
                yield Structure(voc, domain, rels, fns, consts)
                return
            kind, name = symbols[i]
            for interp in interp_options(kind, name):
                if kind == "rel":
                    rels2, fns2, consts2 = {**rels, name: interp}, fns, consts
                elif kind == "fn":
                    rels2, fns2, consts2 = rels, {**fns, name: interp}, consts
                else:
                    rels2, fns2, consts2 = rels, fns, {**consts, name: interp}
                ok = True
                for check in checkpoints.get(name, ()):
                    partial_voc = Vocabulary(
                        sorts=voc.sorts,
                        relations={r: voc.relations[r] for r in rels2},
                        functions={f: voc.functions[f] for f in fns2},
                        constants={c: voc.constants[c] for c in consts2},
                    )
                    partial = Structure(partial_voc, domain, rels2, fns2, consts2)
                    if not _holds(partial, check, {}):
                        ok = False
                        break
                if ok:
                    yield from assign(i + 1, rels2, fns2, consts2)

        yield from assign(0, {}, {}, {})


def _flatten_premises(fs: Iterable[Formula]) -> list[Formula]:
    out = []
    for f in fs:
        if isinstance(f, And):
            out.extend(_flatten_premises(f.items))
        else:
            out.append(f)
    return out


def entails_bounded(premises: Sequence[Formula], conclusion: Formula,
                    size_bound: Union[int, Mapping[Sort, int]],
                    budget: int = 50_000_000) -> EntailmentVerdict:
    """Exhaustively search for a countermodel of size up to `size_bound` per
    sort; returns the least countermodel in the fixed enumeration order, or a
    verdict naming the bound."""
    flat = _flatten_premises(premises)
    voc = vocabulary(conclusion)
    for p in flat:
        voc = voc.union(vocabulary(p))
    if not voc.sorts:
        voc = Vocabulary(sorts=frozenset({0}), relations=voc.relations,
                         functions=voc.functions, constants=voc.constants)
    if isinstance(size_bound, int):
        bound = {s: size_bound for s in voc.sorts}
    else:
        bound = dict(size_bound)
    overlap = any(_has_cross_sort_eq(f) for f in list(flat) + [conclusion])

    # premises become checkable as soon as their last-ordered symbol exists
    order = ([("const", c) for c in sorted(voc.constants)]
             + [("rel", r) for r in sorted(voc.relations)]
             + [("fn", f) for f in sorted(voc.functions)])
    position = {name: i for i, (_k, name) in enumerate(order)}
    checkpoints: dict[str, list] = {}
    for p in flat:
        pv = vocabulary(p)
        syms = pv.symbols()
        if not syms:
            gate = order[0][1] if order else None
        else:
            gate = max(syms, key=lambda s: position[s])
        if gate is not None:
            checkpoints.setdefault(gate, []).append(p)

    no_symbols = not order
    for m in enumerate_structures(voc, bound, with_overlap=overlap,
                                  checkpoints=checkpoints, budget=budget):
        if no_symbols and any(not _holds(m, p, {}) for p in flat):
            continue
        if not _holds(m, conclusion, {}):
            return Countermodel(m, {})
    return EntailsUpToBound(bound)


# ---------------------------------------------------------------------------
# Characteristic formulas and rank classes
# ---------------------------------------------------------------------------

def _atomic_literals(m: Structure, tuple_elems: list[tuple[Sort, int]],
                     env_terms: list[Term]) -> list[Formula]:
    """All atomic facts and negated facts about the pebbled tuple and the
    constants, in a canonical order."""
    voc = m.voc
    terms: list[tuple[Term, int]] = [
        (t, e) for t, (_s, e) in zip(env_terms, tuple_elems)]
    for c in sorted(voc.constants):
        terms.append((Const(c, voc.constants[c]), m.constants[c]))
    lits: list[Formula] = []
    for r in sorted(voc.relations):
        profile = voc.relations[r]
        pools = []
        for s in profile:
            pools.append([(t, e) for t, e in terms
                          if (isinstance(t, Var) and t.sort == s)
                          or (isinstance(t, Const) and t.sort == s)])
        for combo in itertools.product(*pools):
            atom = Atom(r, tuple(t for t, _e in combo))
            fact = tuple(e for _t, e in combo) in m.relations[r]
            lits.append(atom if fact else Not(atom))
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            ti, ei = terms[i]
            tj, ej = terms[j]
            eq = Eq(ti, tj)
            lits.append(eq if ei == ej else Not(eq))
    return lits


def _conj(items: list[Formula]) -> Formula:
    uniq = sorted({format_formula(f): f for f in items}.items())
    items = [f for _k, f in uniq]
    if not items:
        return Top()
    if len(items) == 1:
        return items[0]
    return And(tuple(items))


def _disj(items: list[Formula]) -> Formula:
    uniq = sorted({format_formula(f): f for f in items}.items())
    items = [f for _k, f in uniq]
    if not items:
        return Bottom()
    if len(items) == 1:
        return items[0]
    return Or(tuple(items))


def hintikka_rank_formula(m: Structure, n: int, budget: int = 200_000) -> Formula:
    """The rank-n formula true in exactly the same-vocabulary finite
    structures on which Duplicator wins the n-move game against m.

    Built by the standard back-and-forth recursion rather than as the
    conjunction of all rank-n sentences, which is its finite normal form;
    identical game types yield syntactically identical formulas.
    """
    if m.voc.functions:
        raise VocabularyMismatch("rank formulas require a relational-or-constant vocabulary")
    nodes = 0

    def charge(k: int):
        nonlocal nodes
        nodes += k
        if nodes > budget:
            raise BudgetExceeded(f"characteristic formula exceeds {budget} nodes")

    def char(tuple_elems: list[tuple[Sort, int]], depth: int, r: int) -> Formula:
        env_terms = [Var(f"v{i + 1}", s) for i, (s, _e) in enumerate(tuple_elems)]
        if r == 0:
            lits = _atomic_literals(m, tuple_elems, env_terms)
            charge(len(lits) + 1)
            return _conj(lits)
        var = f"v{depth + 1}"
        parts: list[Formula] = []
        for s in sorted(m.voc.sorts):
            subs: dict[str, Formula] = {}
            for e in m.domain[s]:
                sub = char(tuple_elems + [(s, e)], depth + 1, r - 1)
                subs[format_formula(sub)] = sub
            ordered = [f for _k, f in sorted(subs.items())]
            charge(2 * len(ordered) + 2)
            for sub in ordered:
                parts.append(Exists(var, s, sub))
            parts.append(Forall(var, s, _disj(ordered)))
        return _conj(parts)

    return char([], 0, n)


def rank_classes(ms: Sequence[Structure], n: int) -> list[list[int]]:
    """Partition indices by n-round game equivalence; classes are ordered by
    least member and listed in that order."""
    if not ms:
        return []
    voc = ms[0].voc
    for m in ms[1:]:
        if m.voc != voc:
            raise VocabularyMismatch("rank classes need a shared vocabulary")
    classes: list[list[int]] = []
    for i, m in enumerate(ms):
        placed = False
        for cls in classes:
            if games.ef_solve(ms[cls[0]], m, n).winner == "Duplicator":
                cls.append(i)
                placed = True
                break
        if not placed:
            classes.append([i])
    return classes
