"""Many-sorted vocabularies, formula ASTs, and the textual formula language.

Sorts are nonnegative integers.  A vocabulary declares relation, function and
constant symbols with their sort profiles; symbol names are unique across all
three kinds.  Formulas are immutable ASTs; quantified formulas are
alpha-normalized on construction so that no variable is bound twice along any
root-to-leaf path.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union

from .errors import (
    FormulaSyntaxError,
    NonInjective,
    ProfileMismatch,
    SortMismatch,
    UnknownSymbol,
)

Sort = int


# ---------------------------------------------------------------------------
# Vocabulary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Vocabulary:
    """Sorts plus relation/function/constant symbols with sort profiles."""

    sorts: frozenset[Sort] = frozenset()
    relations: Mapping[str, tuple[Sort, ...]] = field(default_factory=dict)
    functions: Mapping[str, tuple[tuple[Sort, ...], Sort]] = field(default_factory=dict)
    constants: Mapping[str, Sort] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sorts", frozenset(self.sorts))
        object.__setattr__(self, "relations", dict(self.relations))
        object.__setattr__(self, "functions", dict(self.functions))
        object.__setattr__(self, "constants", dict(self.constants))
        names = list(self.relations) + list(self.functions) + list(self.constants)
        if len(names) != len(set(names)):
            dup = sorted(n for n in set(names) if names.count(n) > 1)
            raise NameError(f"symbol names not distinct across kinds: {dup}")
        for rel, profile in self.relations.items():
            if len(profile) < 1:
                raise ValueError(f"relation {rel} must have arity >= 1")
            for s in profile:
                self._check_sort(rel, s)
        for fn, (args, res) in self.functions.items():
            for s in args:
                self._check_sort(fn, s)
            self._check_sort(fn, res)
        for c, s in self.constants.items():
            self._check_sort(c, s)

    def _check_sort(self, symbol: str, s: Sort):
        if s not in self.sorts:
            raise ValueError(f"profile of {symbol} mentions undeclared sort {s}")

    def symbols(self) -> set[str]:
        return set(self.relations) | set(self.functions) | set(self.constants)

    def contains(self, other: "Vocabulary") -> bool:
        """Is `other` a subvocabulary (same profiles, subset of sorts/symbols)?"""
        if not other.sorts <= self.sorts:
            return False
        for r, p in other.relations.items():
            if self.relations.get(r) != p:
                return False
        for f, p in other.functions.items():
            if self.functions.get(f) != p:
                return False
        for c, s in other.constants.items():
            if self.constants.get(c) != s:
                return False
        return True

    def union(self, other: "Vocabulary") -> "Vocabulary":
        for name in self.symbols() & other.symbols():
            mine = (self.relations.get(name), self.functions.get(name), self.constants.get(name))
            theirs = (other.relations.get(name), other.functions.get(name), other.constants.get(name))
            if mine != theirs:
                raise ProfileMismatch(f"symbol {name} has conflicting profiles")
        return Vocabulary(
            sorts=self.sorts | other.sorts,
            relations={**self.relations, **other.relations},
            functions={**self.functions, **other.functions},
            constants={**self.constants, **other.constants},
        )

    def intersection(self, other: "Vocabulary") -> "Vocabulary":
        rels = {r: p for r, p in self.relations.items() if other.relations.get(r) == p}
        fns = {f: p for f, p in self.functions.items() if other.functions.get(f) == p}
        cons = {c: s for c, s in self.constants.items() if other.constants.get(c) == s}
        return Vocabulary(sorts=self.sorts & other.sorts, relations=rels,
                          functions=fns, constants=cons)

    def with_constants(self, extra: Mapping[str, Sort]) -> "Vocabulary":
        clash = set(extra) & self.symbols()
        if clash:
            raise NameError(f"constant names already in use: {sorted(clash)}")
        return Vocabulary(
            sorts=self.sorts | set(extra.values()),
            relations=self.relations,
            functions=self.functions,
            constants={**self.constants, **extra},
        )


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort


@dataclass(frozen=True)
class Const:
    name: str
    sort: Sort


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple["Term", ...]
    sort: Sort


Term = Union[Var, Const, App]


def term_sort(t: Term) -> Sort:
    return t.sort


def term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    elif isinstance(t, App):
        for a in t.args:
            yield from term_vars(a)


def term_symbols(t: Term, rels: set, fns: set, cons: set):
    if isinstance(t, Const):
        cons.add((t.name, t.sort))
    elif isinstance(t, App):
        fns.add((t.fn, tuple(a.sort for a in t.args), t.sort))
        for a in t.args:
            term_symbols(a, rels, fns, cons)


def format_term(t: Term) -> str:
    if isinstance(t, (Var, Const)):
        return t.name
    return f"{t.fn}({', '.join(format_term(a) for a in t.args)})"


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    items: tuple["Formula", ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("And requires at least one conjunct")


@dataclass(frozen=True)
class Or:
    items: tuple["Formula", ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("Or requires at least one disjunct")


@dataclass(frozen=True)
class Forall:
    var: str
    sort: Sort
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    sort: Sort
    body: "Formula"


@dataclass(frozen=True)
class Qge:
    """Threshold quantifier: at least k distinct witnesses."""
    k: int
    var: str
    sort: Sort
    body: "Formula"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("Qge threshold must be >= 1")


@dataclass(frozen=True)
class Qaleph:
    """Symbolic cardinality quantifier: at least aleph_index many witnesses."""
    index: int
    var: str
    sort: Sort
    body: "Formula"

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("Qaleph index must be >= 0")


Formula = Union[Atom, Eq, Top, Bottom, Not, And, Or, Forall, Exists, Qge, Qaleph]

QUANTIFIERS = (Forall, Exists, Qge, Qaleph)


def is_atomic(f: Formula) -> bool:
    return isinstance(f, (Atom, Eq))


# ---------------------------------------------------------------------------
# Traversal helpers
# ---------------------------------------------------------------------------

def subterms(f: Formula) -> Iterator[Term]:
    if isinstance(f, Atom):
        yield from f.args
    elif isinstance(f, Eq):
        yield f.left
        yield f.right
    elif isinstance(f, Not):
        yield from subterms(f.body)
    elif isinstance(f, (And, Or)):
        for g in f.items:
            yield from subterms(g)
    elif isinstance(f, QUANTIFIERS):
        yield from subterms(f.body)


def free_vars(f: Formula) -> set[Var]:
    if is_atomic(f):
        return {v for t in subterms(f) for v in term_vars(t)}
    if isinstance(f, (Top, Bottom)):
        return set()
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or)):
        out: set[Var] = set()
        for g in f.items:
            out |= free_vars(g)
        return out
    assert isinstance(f, QUANTIFIERS)
    return {v for v in free_vars(f.body) if v.name != f.var}


def substitute_var(f: Formula, name: str, replacement: Term) -> Formula:
    """Replace free occurrences of variable `name` by a term.

    Capture is impossible on alpha-normalized input because binders are
    pairwise distinct along every path.
    """
    def sub_t(t: Term) -> Term:
        if isinstance(t, Var):
            return replacement if t.name == name else t
        if isinstance(t, App):
            return App(t.fn, tuple(sub_t(a) for a in t.args), t.sort)
        return t

    if isinstance(f, Atom):
        return Atom(f.rel, tuple(sub_t(a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(sub_t(f.left), sub_t(f.right))
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Not):
        return Not(substitute_var(f.body, name, replacement))
    if isinstance(f, And):
        return And(tuple(substitute_var(g, name, replacement) for g in f.items))
    if isinstance(f, Or):
        return Or(tuple(substitute_var(g, name, replacement) for g in f.items))
    assert isinstance(f, QUANTIFIERS)
    if f.var == name:
        return f
    body = substitute_var(f.body, name, replacement)
    if isinstance(f, Forall):
        return Forall(f.var, f.sort, body)
    if isinstance(f, Exists):
        return Exists(f.var, f.sort, body)
    if isinstance(f, Qge):
        return Qge(f.k, f.var, f.sort, body)
    return Qaleph(f.index, f.var, f.sort, body)


def alpha_normalize(f: Formula) -> Formula:
    """Rename binders so no variable is bound twice along any path.

    Names already unique along their path are kept; clashes get a numeric
    suffix.  Idempotent, and deterministic for a given AST.
    """
    def fresh(name: str, taken: frozenset[str]) -> str:
        if name not in taken:
            return name
        base = re.sub(r"_\d+$", "", name)
        i = 2
        while f"{base}_{i}" in taken:
            i += 1
        return f"{base}_{i}"

    def walk(g: Formula, bound: frozenset[str]) -> Formula:
        if is_atomic(g) or isinstance(g, (Top, Bottom)):
            return g
        if isinstance(g, Not):
            return Not(walk(g.body, bound))
        if isinstance(g, And):
            return And(tuple(walk(h, bound) for h in g.items))
        if isinstance(g, Or):
            return Or(tuple(walk(h, bound) for h in g.items))
        assert isinstance(g, QUANTIFIERS)
        new = fresh(g.var, bound)
        body = g.body
        if new != g.var:
            body = substitute_var(body, g.var, Var(new, g.sort))
        body = walk(body, bound | {new})
        if isinstance(g, Forall):
            return Forall(new, g.sort, body)
        if isinstance(g, Exists):
            return Exists(new, g.sort, body)
        if isinstance(g, Qge):
            return Qge(g.k, new, g.sort, body)
        return Qaleph(g.index, new, g.sort, body)

    return walk(f, frozenset())


def alpha_equal(f: Formula, g: Formula) -> bool:
    """Structural equality modulo bound-variable names."""
    return _debruijn(f, {}) == _debruijn(g, {})


def _debruijn(f: Formula, env: dict[str, int]):
    def term_key(t: Term):
        if isinstance(t, Var):
            return ("v", env.get(t.name, t.name), t.sort)
        if isinstance(t, Const):
            return ("c", t.name, t.sort)
        return ("f", t.fn, tuple(term_key(a) for a in t.args), t.sort)

    if isinstance(f, Atom):
        return ("atom", f.rel, tuple(term_key(a) for a in f.args))
    if isinstance(f, Eq):
        return ("eq", term_key(f.left), term_key(f.right))
    if isinstance(f, Top):
        return ("top",)
    if isinstance(f, Bottom):
        return ("bottom",)
    if isinstance(f, Not):
        return ("not", _debruijn(f.body, env))
    if isinstance(f, And):
        return ("and", tuple(_debruijn(g, env) for g in f.items))
    if isinstance(f, Or):
        return ("or", tuple(_debruijn(g, env) for g in f.items))
    assert isinstance(f, QUANTIFIERS)
    env2 = dict(env)
    env2[f.var] = len(env)
    tag = {Forall: "forall", Exists: "exists", Qge: "qge", Qaleph: "qaleph"}[type(f)]
    extra = f.k if isinstance(f, Qge) else (f.index if isinstance(f, Qaleph) else None)
    return (tag, extra, f.sort, _debruijn(f.body, env2))


# ---------------------------------------------------------------------------
# Vocabulary of a formula
# ---------------------------------------------------------------------------

def vocabulary(f: Formula) -> Vocabulary:
    """The exact set of non-logical symbols occurring in `f`.

    Sorts are those mentioned by symbol profiles or quantifier binders; a
    formula built from top/bottom alone has the empty vocabulary.
    """
    rels: set = set()
    fns: set = set()
    cons: set = set()
    sorts: set[Sort] = set()

    def walk(g: Formula):
        if isinstance(g, Atom):
            rels.add((g.rel, tuple(a.sort for a in g.args)))
            for t in g.args:
                sorts.add(t.sort)
                term_symbols(t, rels, fns, cons)
                for v in term_vars(t):
                    sorts.add(v.sort)
        elif isinstance(g, Eq):
            for t in (g.left, g.right):
                sorts.add(t.sort)
                term_symbols(t, rels, fns, cons)
        elif isinstance(g, Not):
            walk(g.body)
        elif isinstance(g, (And, Or)):
            for h in g.items:
                walk(h)
        elif isinstance(g, QUANTIFIERS):
            sorts.add(g.sort)
            walk(g.body)

    walk(f)
    for _fn, argsorts, res in fns:
        sorts.update(argsorts)
        sorts.add(res)
    for _c, s in cons:
        sorts.add(s)
    return Vocabulary(
        sorts=frozenset(sorts),
        relations={r: p for r, p in rels},
        functions={fn: (argsorts, res) for fn, argsorts, res in fns},
        constants={c: s for c, s in cons},
    )


# ---------------------------------------------------------------------------
# Dual negation and negation normal form
# ---------------------------------------------------------------------------

def _neg(f: Formula) -> Formula:
    """Negation prefix that cancels an outer Not instead of stacking."""
    if isinstance(f, Not):
        return f.body
    if isinstance(f, Top):
        return Bottom()
    if isinstance(f, Bottom):
        return Top()
    return Not(f)


def dual_negation(f: Formula) -> Formula:
    """The one-step dual: a structure satisfies the result iff it does not
    satisfy `f`.

    Atomic formulas gain a negation; a negation is stripped; conjunction,
    disjunction and the standard quantifiers flip, with negations pushed one
    level onto their children.  Threshold and symbolic quantifiers have no
    positive dual in this AST, so they park a negation in front.  Double
    negations produced on children are cancelled, which makes the operation an
    involution on non-atomic roots.
    """
    if is_atomic(f):
        return Not(f)
    if isinstance(f, Top):
        return Bottom()
    if isinstance(f, Bottom):
        return Top()
    if isinstance(f, Not):
        return f.body
    if isinstance(f, And):
        return Or(tuple(_neg(g) for g in f.items))
    if isinstance(f, Or):
        return And(tuple(_neg(g) for g in f.items))
    if isinstance(f, Forall):
        return Exists(f.var, f.sort, _neg(f.body))
    if isinstance(f, Exists):
        return Forall(f.var, f.sort, _neg(f.body))
    return Not(f)


def nnf(f: Formula) -> Formula:
    """Push negations down to atoms (and to threshold/symbolic quantifiers,
    where they must park)."""
    if is_atomic(f) or isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, And):
        return And(tuple(nnf(g) for g in f.items))
    if isinstance(f, Or):
        return Or(tuple(nnf(g) for g in f.items))
    if isinstance(f, Forall):
        return Forall(f.var, f.sort, nnf(f.body))
    if isinstance(f, Exists):
        return Exists(f.var, f.sort, nnf(f.body))
    if isinstance(f, Qge):
        return Qge(f.k, f.var, f.sort, nnf(f.body))
    if isinstance(f, Qaleph):
        return Qaleph(f.index, f.var, f.sort, nnf(f.body))
    body = f.body
    if is_atomic(body):
        return f
    if isinstance(body, (Qge, Qaleph)):
        return Not(type(body)(*_qfields(body), nnf(body.body)))  # parked negation
    return nnf(dual_negation(body))


def _qfields(q) -> tuple:
    if isinstance(q, Qge):
        return (q.k, q.var, q.sort)
    return (q.index, q.var, q.sort)


def un_ex_sorts(f: Formula) -> tuple[frozenset[Sort], frozenset[Sort]]:
    """Sorts of universally / existentially quantified variables, computed on
    the negation normal form.

    Threshold and symbolic quantifiers count as existential; under a parked
    negation they count as universal and their body is read with flipped
    polarity.
    """
    un: set[Sort] = set()
    ex: set[Sort] = set()

    def walk(g: Formula, flipped: bool):
        if is_atomic(g) or isinstance(g, (Top, Bottom)):
            return
        if isinstance(g, Not):
            body = g.body
            if isinstance(body, (Qge, Qaleph)):
                (un if not flipped else ex).add(body.sort)
                walk(body.body, not flipped)
            return
        if isinstance(g, (And, Or)):
            for h in g.items:
                walk(h, flipped)
            return
        if isinstance(g, Forall):
            (un if not flipped else ex).add(g.sort)
        elif isinstance(g, (Exists, Qge, Qaleph)):
            (ex if not flipped else un).add(g.sort)
        walk(g.body, flipped)

    walk(nnf(f), False)
    return frozenset(un), frozenset(ex)


# ---------------------------------------------------------------------------
# Renaming
# ---------------------------------------------------------------------------

def rename(f: Formula, mapping: Mapping[str, str],
           voc: Optional[Vocabulary] = None) -> Formula:
    """Substitute non-logical symbols according to an injective map.

    Targets must be fresh or carry the same profile as the source; profiles
    are checked against `voc` when given, otherwise against the symbols
    occurring in `f`.
    """
    values = list(mapping.values())
    if len(values) != len(set(values)):
        raise NonInjective("renaming map is not injective")
    fvoc = vocabulary(f)
    check = voc if voc is not None else fvoc
    for src, dst in mapping.items():
        if src == dst:
            continue
        src_profile = (check.relations.get(src), check.functions.get(src),
                       check.constants.get(src))
        dst_profile = (check.relations.get(dst), check.functions.get(dst),
                       check.constants.get(dst))
        if dst_profile != (None, None, None) and dst_profile != src_profile:
            raise ProfileMismatch(
                f"renaming {src} -> {dst} changes the symbol profile")

    def ren_t(t: Term) -> Term:
        if isinstance(t, Const):
            return Const(mapping.get(t.name, t.name), t.sort)
        if isinstance(t, App):
            return App(mapping.get(t.fn, t.fn), tuple(ren_t(a) for a in t.args), t.sort)
        return t

    def walk(g: Formula) -> Formula:
        if isinstance(g, Atom):
            return Atom(mapping.get(g.rel, g.rel), tuple(ren_t(a) for a in g.args))
        if isinstance(g, Eq):
            return Eq(ren_t(g.left), ren_t(g.right))
        if isinstance(g, (Top, Bottom)):
            return g
        if isinstance(g, Not):
            return Not(walk(g.body))
        if isinstance(g, And):
            return And(tuple(walk(h) for h in g.items))
        if isinstance(g, Or):
            return Or(tuple(walk(h) for h in g.items))
        body = walk(g.body)
        if isinstance(g, Forall):
            return Forall(g.var, g.sort, body)
        if isinstance(g, Exists):
            return Exists(g.var, g.sort, body)
        if isinstance(g, Qge):
            return Qge(g.k, g.var, g.sort, body)
        return Qaleph(g.index, g.var, g.sort, body)

    return walk(f)


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return f"{f.rel}({', '.join(format_term(a) for a in f.args)})"
    if isinstance(f, Eq):
        return f"{format_term(f.left)} = {format_term(f.right)}"
    if isinstance(f, Top):
        return "top"
    if isinstance(f, Bottom):
        return "bottom"
    if isinstance(f, Not):
        body = format_formula(f.body)
        if isinstance(f.body, (Eq,)):
            return f"not ({body})"
        return f"not {body}"
    if isinstance(f, And):
        return "And[" + ", ".join(format_formula(g) for g in f.items) + "]"
    if isinstance(f, Or):
        return "Or[" + ", ".join(format_formula(g) for g in f.items) + "]"
    if isinstance(f, Forall):
        return f"forall {f.var}:{f.sort}. {format_formula(f.body)}"
    if isinstance(f, Exists):
        return f"exists {f.var}:{f.sort}. {format_formula(f.body)}"
    if isinstance(f, Qge):
        return f"Qge {f.k} {f.var}:{f.sort}. {format_formula(f.body)}"
    return f"Qaleph {f.index} {f.var}:{f.sort}. {format_formula(f.body)}"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<arrow2><->)
  | (?P<arrow>->)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9']*)
  | (?P<punct>[()\[\],.:=^<])
""", re.VERBOSE)

_KEYWORDS = {"forall", "exists", "Qge", "Qaleph", "And", "Or", "not", "top", "bottom"}


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
            kind = m.lastgroup
            if kind != "ws":
                self.toks.append((kind, m.group(), pos))
            pos = m.end()
        self.i = 0

    def peek(self) -> Optional[tuple[str, str, int]]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> tuple[str, str, int]:
        if self.i >= len(self.toks):
            raise FormulaSyntaxError("unexpected end of input", len(self.text))
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[1] != value:
            raise FormulaSyntaxError(f"expected {value!r}, found {tok[1]!r}", tok[2])
        return tok

    @property
    def pos(self) -> int:
        tok = self.peek()
        return tok[2] if tok else len(self.text)


class _Parser:
    """Recursive-descent parser for the formula language."""

    def __init__(self, text: str, voc: Vocabulary, allow_cross_sort_eq: bool = False):
        self.toks = _Tokens(text)
        self.voc = voc
        self.allow_cross_sort_eq = allow_cross_sort_eq

    def parse(self) -> Formula:
        f = self.formula({}, {})
        tok = self.toks.peek()
        if tok is not None:
            raise FormulaSyntaxError(f"trailing input {tok[1]!r}", tok[2])
        return alpha_normalize(f)

    def formula(self, env: dict[str, Sort], gens: dict[str, int]) -> Formula:
        tok = self.toks.peek()
        if tok is None:
            raise FormulaSyntaxError("expected a formula", self.toks.pos)
        kind, value, pos = tok

        if value in ("forall", "exists"):
            self.toks.next()
            var, sort = self.binder(env)
            body = self.formula({**env, var: sort}, gens)
            return Forall(var, sort, body) if value == "forall" else Exists(var, sort, body)
        if value == "Qge":
            self.toks.next()
            k = self.nat(gens)
            if k < 1:
                raise FormulaSyntaxError("Qge threshold must be >= 1", pos)
            var, sort = self.binder(env)
            return Qge(k, var, sort, self.formula({**env, var: sort}, gens))
        if value == "Qaleph":
            self.toks.next()
            a = self.nat(gens)
            var, sort = self.binder(env)
            return Qaleph(a, var, sort, self.formula({**env, var: sort}, gens))
        if value == "not":
            self.toks.next()
            return Not(self.formula(env, gens))
        if value in ("And", "Or"):
            self.toks.next()
            return self.list_form(value, env, gens)
        if value == "top":
            self.toks.next()
            return Top()
        if value == "bottom":
            self.toks.next()
            return Bottom()
        if kind == "num" and value in self.voc.constants:
            return self.atom_or_eq(env, gens)
        if value == "(":
            self.toks.next()
            left = self.formula(env, gens)
            tok2 = self.toks.next()
            if tok2[1] == ")":
                return left
            if tok2[1] == "->":
                right = self.formula(env, gens)
                self.toks.expect(")")
                return Or((_neg(left), right))
            if tok2[1] == "<->":
                right = self.formula(env, gens)
                self.toks.expect(")")
                return Or((And((left, right)), And((_neg(left), _neg(right)))))
            raise FormulaSyntaxError(f"expected ')', '->' or '<->', found {tok2[1]!r}", tok2[2])
        if kind == "ident":
            return self.atom_or_eq(env, gens)
        raise FormulaSyntaxError(f"unexpected token {value!r}", pos)

    def list_form(self, head: str, env: dict[str, Sort], gens: dict[str, int]) -> Formula:
        self.toks.expect("[")
        # bounded generator form: And[n<N] body / Or[n<N] body
        save = self.toks.i
        tok = self.toks.peek()
        if tok and tok[0] == "ident" and tok[1] not in _KEYWORDS:
            name = tok[1]
            self.toks.next()
            nxt = self.toks.peek()
            if nxt and nxt[1] == "<":
                self.toks.next()
                bound = self.nat(gens)
                self.toks.expect("]")
                if bound < 1:
                    raise FormulaSyntaxError("generator bound must be >= 1", tok[2])
                if name in env or name in gens:
                    raise FormulaSyntaxError(f"generator variable {name!r} already in use", tok[2])
                body_start = self.toks.i
                items = []
                for value in range(bound):
                    self.toks.i = body_start
                    items.append(self.formula(env, {**gens, name: value}))
                return And(tuple(items)) if head == "And" else Or(tuple(items))
        self.toks.i = save
        items = [self.formula(env, gens)]
        while True:
            tok = self.toks.next()
            if tok[1] == "]":
                break
            if tok[1] != ",":
                raise FormulaSyntaxError(f"expected ',' or ']', found {tok[1]!r}", tok[2])
            items.append(self.formula(env, gens))
        return And(tuple(items)) if head == "And" else Or(tuple(items))

    def binder(self, env: dict[str, Sort]) -> tuple[str, Sort]:
        tok = self.toks.next()
        if tok[0] != "ident" or tok[1] in _KEYWORDS:
            raise FormulaSyntaxError(f"expected a variable name, found {tok[1]!r}", tok[2])
        name = tok[1]
        if name in self.voc.symbols():
            raise FormulaSyntaxError(f"variable {name!r} clashes with a vocabulary symbol", tok[2])
        self.toks.expect(":")
        sort = self.nat({})
        if sort not in self.voc.sorts:
            raise UnknownSymbol(f"sort {sort}")
        self.toks.expect(".")
        return name, sort

    def nat(self, gens: dict[str, int]) -> int:
        tok = self.toks.next()
        if tok[0] == "num":
            return int(tok[1])
        if tok[0] == "ident" and tok[1] in gens:
            return gens[tok[1]]
        raise FormulaSyntaxError(f"expected a number, found {tok[1]!r}", tok[2])

    def atom_or_eq(self, env: dict[str, Sort], gens: dict[str, int]) -> Formula:
        kind, name, pos = self.toks.next()
        nxt = self.toks.peek()
        if nxt and nxt[1] == "(" and name in self.voc.relations:
            profile = self.voc.relations[name]
            self.toks.next()
            args = self.term_list(env, gens)
            if len(args) != len(profile):
                raise SortMismatch(f"{name}(...)", f"arity {len(profile)}", f"arity {len(args)}")
            for i, (t, s) in enumerate(zip(args, profile)):
                if t.sort != s:
                    raise SortMismatch(f"argument {i + 1} of {name}", s, t.sort)
            return Atom(name, tuple(args))
        # otherwise this is a term, which must be the left side of an equality
        left = self.term_tail(kind, name, pos, env, gens)
        tok = self.toks.peek()
        if tok is None or tok[1] != "=":
            raise FormulaSyntaxError(
                f"term {format_term(left)!r} is not a formula (expected '=')",
                pos)
        self.toks.next()
        right = self.term(env, gens)
        if left.sort != right.sort and not self.allow_cross_sort_eq:
            raise SortMismatch(f"{format_term(left)} = {format_term(right)}",
                               left.sort, right.sort)
        return Eq(left, right)

    def term(self, env: dict[str, Sort], gens: dict[str, int]) -> Term:
        kind, name, pos = self.toks.next()
        return self.term_tail(kind, name, pos, env, gens)

    def term_tail(self, kind: str, name: str, pos: int,
                  env: dict[str, Sort], gens: dict[str, int]) -> Term:
        if kind == "num" and name in self.voc.constants:
            return Const(name, self.voc.constants[name])
        if kind != "ident" or name in _KEYWORDS:
            raise FormulaSyntaxError(f"expected a term, found {name!r}", pos)
        nxt = self.toks.peek()
        if nxt and nxt[1] == "^":
            # iterated application: f^k(t)
            if name not in self.voc.functions:
                raise UnknownSymbol(name)
            argsorts, res = self.voc.functions[name]
            if len(argsorts) != 1 or argsorts[0] != res:
                raise SortMismatch(f"{name}^k", "a unary function on one sort",
                                   f"{argsorts} -> {res}")
            self.toks.next()
            k = self.nat(gens)
            self.toks.expect("(")
            inner = self.term(env, gens)
            self.toks.expect(")")
            if inner.sort != res:
                raise SortMismatch(f"argument of {name}^{k}", res, inner.sort)
            t: Term = inner
            for _ in range(k):
                t = App(name, (t,), res)
            return t
        if nxt and nxt[1] == "(" and name in self.voc.functions:
            argsorts, res = self.voc.functions[name]
            self.toks.next()
            args = self.term_list(env, gens)
            if len(args) != len(argsorts):
                raise SortMismatch(f"{name}(...)", f"arity {len(argsorts)}", f"arity {len(args)}")
            for i, (t, s) in enumerate(zip(args, argsorts)):
                if t.sort != s:
                    raise SortMismatch(f"argument {i + 1} of {name}", s, t.sort)
            return App(name, tuple(args), res)
        if name in env:
            return Var(name, env[name])
        if name in self.voc.constants:
            return Const(name, self.voc.constants[name])
        if name in self.voc.relations or name in self.voc.functions:
            raise FormulaSyntaxError(f"symbol {name!r} used without arguments", pos)
        raise UnknownSymbol(name)

    def term_list(self, env: dict[str, Sort], gens: dict[str, int]) -> list[Term]:
        args = [self.term(env, gens)]
        while True:
            tok = self.toks.next()
            if tok[1] == ")":
                return args
            if tok[1] != ",":
                raise FormulaSyntaxError(f"expected ',' or ')', found {tok[1]!r}", tok[2])
            args.append(self.term(env, gens))


def parse_formula(text: str, voc: Vocabulary,
                  allow_cross_sort_eq: bool = False) -> Formula:
    """Parse a formula in the textual language against a vocabulary.

    The result is alpha-normalized; printing it with `format_formula` and
    re-parsing yields an equal AST.  The textual language rejects equalities
    between terms of different sorts unless `allow_cross_sort_eq` is set;
    programmatically built ASTs may always contain them (element identity is
    shared across sorts, so sort-overlap sentences are expressible).
    """
    return _Parser(text, voc, allow_cross_sort_eq).parse()
