"""Finite many-sorted structures, structure-level operations, and symbolic
equivalence structures presented by cardinal parameters.

Element ids are naturals.  Identity is shared across sorts: the same id
appearing in two sort domains is the same element, which is what makes
sort-overlap sentences like "every sort-1 element is a sort-0 element"
meaningful.  Structure equality is literal, not up to isomorphism.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    EmptyRelativization,
    NameClash,
    NonRelational,
    NotClosed,
    NotSubvocabulary,
    OutOfDomain,
    VocabularyMismatch,
)
from .syntax import Sort, Vocabulary


# ---------------------------------------------------------------------------
# Finite structures
# ---------------------------------------------------------------------------

class Structure:
    """A finite interpretation of a many-sorted vocabulary."""

    def __init__(self, voc: Vocabulary,
                 domain: Mapping[Sort, Iterable[int]],
                 relations: Mapping[str, Iterable[tuple[int, ...]]] = (),
                 functions: Mapping[str, Mapping[tuple[int, ...], int]] = (),
                 constants: Mapping[str, int] = ()):
        self.voc = voc
        self.domain = {s: tuple(sorted(set(elems))) for s, elems in domain.items()}
        self.relations = {r: frozenset(map(tuple, tuples))
                          for r, tuples in dict(relations).items()}
        self.functions = {f: dict(table) for f, table in dict(functions).items()}
        self.constants = dict(constants)
        self._validate()
        self._key = self.encode()

    def _validate(self):
        if set(self.domain) != set(self.voc.sorts):
            raise ValueError("domain must interpret exactly the vocabulary sorts")
        for s, elems in self.domain.items():
            if not elems:
                raise ValueError(f"sort {s} has an empty domain")
        if set(self.relations) != set(self.voc.relations):
            raise ValueError("relations must interpret exactly the vocabulary relations")
        for r, tuples in self.relations.items():
            profile = self.voc.relations[r]
            for tup in tuples:
                if len(tup) != len(profile):
                    raise ValueError(f"tuple {tup} has wrong arity for {r}")
                for e, s in zip(tup, profile):
                    if e not in self.domain[s]:
                        raise ValueError(f"tuple {tup} of {r} leaves sort {s} domain")
        if set(self.functions) != set(self.voc.functions):
            raise ValueError("functions must interpret exactly the vocabulary functions")
        for f, table in self.functions.items():
            argsorts, res = self.voc.functions[f]
            expected = set(itertools.product(*(self.domain[s] for s in argsorts)))
            if set(table) != expected:
                raise ValueError(f"function {f} is not total on its domain")
            for args, value in table.items():
                if value not in self.domain[res]:
                    raise ValueError(f"function {f} maps {args} outside sort {res}")
        if set(self.constants) != set(self.voc.constants):
            raise ValueError("constants must interpret exactly the vocabulary constants")
        for c, e in self.constants.items():
            if e not in self.domain[self.voc.constants[c]]:
                raise ValueError(f"constant {c} interpreted outside its sort")

    def encode(self) -> tuple:
        return (
            tuple(sorted(self.domain.items())),
            tuple(sorted((r, tuple(sorted(ts))) for r, ts in self.relations.items())),
            tuple(sorted((f, tuple(sorted(t.items()))) for f, t in self.functions.items())),
            tuple(sorted(self.constants.items())),
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, Structure) and self.voc == other.voc and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        sizes = {s: len(d) for s, d in self.domain.items()}
        return f"Structure(sorts={sizes}, rels={ {r: len(t) for r, t in self.relations.items()} })"

    def elements(self, sort: Sort) -> tuple[int, ...]:
        return self.domain[sort]

    def size(self, sort: Sort) -> int:
        return len(self.domain[sort])


def reduct(m: Structure, sub: Vocabulary) -> Structure:
    """Forget the symbols and sorts not present in `sub`."""
    if not m.voc.contains(sub):
        raise NotSubvocabulary(f"{sorted(sub.symbols())} is not a subvocabulary")
    return Structure(
        sub,
        {s: m.domain[s] for s in sub.sorts},
        {r: m.relations[r] for r in sub.relations},
        {f: m.functions[f] for f in sub.functions},
        {c: m.constants[c] for c in sub.constants},
    )


def expand_constants(m: Structure,
                     picks: Sequence[tuple[str, Sort, int]]) -> Structure:
    """Expand with new constants naming given elements."""
    extra: dict[str, Sort] = {}
    values: dict[str, int] = {}
    for name, sort, elem in picks:
        if name in m.voc.symbols() or name in extra:
            raise NameClash(f"constant name {name!r} already in use")
        if sort not in m.voc.sorts or elem not in m.domain[sort]:
            raise OutOfDomain(f"element {elem} is not in sort {sort}")
        extra[name] = sort
        values[name] = elem
    return Structure(
        m.voc.with_constants(extra),
        m.domain,
        m.relations,
        m.functions,
        {**m.constants, **values},
    )


def relativize(m: Structure, sort: Sort, keep: Iterable[int]) -> Structure:
    """Restrict one sort's domain to a subset closed under the functions."""
    keep = set(keep)
    if not keep:
        raise EmptyRelativization("cannot relativize to the empty set")
    if not keep <= set(m.domain[sort]):
        raise OutOfDomain(f"subset {sorted(keep)} not inside sort {sort}")
    new_domain = {s: (tuple(sorted(keep)) if s == sort else d)
                  for s, d in m.domain.items()}
    for c, e in m.constants.items():
        if m.voc.constants[c] == sort and e not in keep:
            raise NotClosed(c, (e,))
    new_functions = {}
    for f, table in m.functions.items():
        argsorts, res = m.voc.functions[f]
        new_table = {}
        for args in itertools.product(*(new_domain[s] for s in argsorts)):
            value = table[args]
            if res == sort and value not in keep:
                raise NotClosed(f, args)
            new_table[args] = value
        new_functions[f] = new_table
    new_relations = {}
    for r, tuples in m.relations.items():
        profile = m.voc.relations[r]
        new_relations[r] = {
            t for t in tuples
            if all(s != sort or e in keep for e, s in zip(t, profile))
        }
    return Structure(m.voc, new_domain, new_relations, new_functions, m.constants)


def disjoint_union(ms: Sequence[Structure]) -> Structure:
    """Tagged union of relational structures over one vocabulary."""
    if not ms:
        raise ValueError("disjoint_union of no structures")
    voc = ms[0].voc
    if voc.functions or voc.constants:
        raise NonRelational("disjoint union requires a relational vocabulary")
    for m in ms[1:]:
        if m.voc != voc:
            raise VocabularyMismatch("structures disagree on vocabulary")
    offsets = []
    next_free = 0
    for m in ms:
        all_ids = sorted({e for d in m.domain.values() for e in d})
        remap = {e: next_free + i for i, e in enumerate(all_ids)}
        offsets.append(remap)
        next_free += len(all_ids)
    domain = {s: tuple(itertools.chain.from_iterable(
        (offsets[i][e] for e in m.domain[s]) for i, m in enumerate(ms)))
        for s in voc.sorts}
    relations = {
        r: {tuple(offsets[i][e] for e in t) for i, m in enumerate(ms)
            for t in m.relations[r]}
        for r in voc.relations
    }
    return Structure(voc, domain, relations)


def isomorphism(m: Structure, n: Structure) -> Optional[dict[Sort, dict[int, int]]]:
    """The lexicographically least sort-indexed isomorphism, if any.

    Because ids are shared across sorts, the candidate maps are built on the
    id level (one global bijection restricted per sort), so overlapping
    domains stay consistent.
    """
    if m.voc != n.voc:
        raise VocabularyMismatch("isomorphism requires equal vocabularies")
    m_ids = sorted({e for d in m.domain.values() for e in d})
    n_ids_by_sort = {s: set(n.domain[s]) for s in n.voc.sorts}
    m_sorts = {e: frozenset(s for s in m.voc.sorts if e in m.domain[s]) for e in m_ids}
    for s in m.voc.sorts:
        if m.size(s) != n.size(s):
            return None

    def respects(mapping: dict[int, int]) -> bool:
        for r, profile in m.voc.relations.items():
            rel_n = n.relations[r]
            for t in m.relations[r]:
                if all(e in mapping for e in t):
                    if tuple(mapping[e] for e in t) not in rel_n:
                        return False
            inv = {v: k for k, v in mapping.items()}
            for t in rel_n:
                if all(e in inv for e in t):
                    if tuple(inv[e] for e in t) not in m.relations[r]:
                        return False
        for f in m.voc.functions:
            table_m, table_n = m.functions[f], n.functions[f]
            for args, value in table_m.items():
                if all(e in mapping for e in args) and value in mapping:
                    if table_n[tuple(mapping[e] for e in args)] != mapping[value]:
                        return False
        for c, e in m.constants.items():
            if e in mapping and mapping[e] != n.constants[c]:
                return False
        return True

    def extend(i: int, mapping: dict[int, int], used: set[int]):
        if i == len(m_ids):
            return dict(mapping)
        e = m_ids[i]
        candidates = sorted(
            v for s in m_sorts[e] for v in n_ids_by_sort[s] if v not in used)
        for v in sorted(set(candidates)):
            if any(v not in n_ids_by_sort[s] for s in m_sorts[e]):
                continue
            if any(v in n_ids_by_sort[s] for s in n.voc.sorts if s not in m_sorts[e]):
                continue
            mapping[e] = v
            used.add(v)
            if respects(mapping):
                result = extend(i + 1, mapping, used)
                if result is not None:
                    return result
            del mapping[e]
            used.discard(v)
        return None

    flat = extend(0, {}, set())
    if flat is None:
        return None
    return {s: {e: flat[e] for e in m.domain[s]} for s in m.voc.sorts}


# ---------------------------------------------------------------------------
# Symbolic cardinals and symbolic equivalence structures
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=False)
class SymCard:
    """Either a finite count or an aleph number: Fin(n) or Aleph(k)."""

    kind: str  # "fin" | "aleph"
    value: int

    def __post_init__(self):
        if self.kind not in ("fin", "aleph"):
            raise ValueError("kind must be 'fin' or 'aleph'")
        if self.value < 0:
            raise ValueError("value must be >= 0")

    @staticmethod
    def fin(n: int) -> "SymCard":
        return SymCard("fin", n)

    @staticmethod
    def aleph(k: int) -> "SymCard":
        return SymCard("aleph", k)

    @property
    def is_finite(self) -> bool:
        return self.kind == "fin"

    def __lt__(self, other: "SymCard") -> bool:
        if self.is_finite and other.is_finite:
            return self.value < other.value
        if self.is_finite:
            return True
        if other.is_finite:
            return False
        return self.value < other.value

    def __le__(self, other: "SymCard") -> bool:
        return self == other or self < other

    def __add__(self, other: "SymCard") -> "SymCard":
        if self.is_finite and other.is_finite:
            return SymCard.fin(self.value + other.value)
        return max(self, other, key=lambda c: (not c.is_finite, c.value))

    def __mul__(self, other: "SymCard") -> "SymCard":
        if self.is_finite and other.is_finite:
            return SymCard.fin(self.value * other.value)
        if (self.is_finite and self.value == 0) or (other.is_finite and other.value == 0):
            return SymCard.fin(0)
        return max(self, other, key=lambda c: (not c.is_finite, c.value))

    def __str__(self) -> str:
        return f"fin {self.value}" if self.is_finite else f"aleph {self.value}"


ZERO = SymCard.fin(0)


def sym_sum(cards: Iterable[SymCard]) -> SymCard:
    total = ZERO
    for c in cards:
        total = total + c
    return total


@dataclass(frozen=True)
class SymbolicEqStructure:
    """A single-sorted {E}-structure whose equivalence classes come in
    symmetric groups: each group contributes `num_classes` classes of size
    `class_size`, both possibly infinite."""

    groups: tuple[tuple[SymCard, SymCard], ...]

    def __post_init__(self):
        if not self.groups:
            raise ValueError("at least one class group is required")
        if sym_sum(n * s for n, s in self.groups) == ZERO:
            raise ValueError("total element count must be nonzero")

    def total_size(self) -> SymCard:
        return sym_sum(n * s for n, s in self.groups)

    def __str__(self) -> str:
        return "; ".join(f"({n}, {s})" for n, s in self.groups)
