"""Finite posets stored as transitive-closure bitsets.

Every element is addressed by a stable integer index; ``below[i]`` is a Python
int whose bit ``j`` is set iff element ``j`` is strictly below element ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence


class PosetError(Exception):
    pass


class CycleError(PosetError):
    pass


class DuplicateLabel(PosetError):
    pass


class UnknownElement(PosetError, KeyError):
    pass


class NotALattice(PosetError):
    def __init__(self, a, b, what):
        super().__init__(f"no {what} for pair ({a!r}, {b!r})")
        self.pair = (a, b)
        self.what = what


class ImproperElement(PosetError):
    pass


def bits(mask: int):
    """Yield the indices of set bits in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


class Poset:
    """Immutable finite poset with stable element indices."""

    __slots__ = ("labels", "below", "above", "_index", "_levels")

    def __init__(self, labels: Sequence[Hashable], below: Sequence[int]):
        # Internal constructor: ``below`` must already be transitively closed.
        self.labels = tuple(labels)
        self.below = tuple(below)
        n = len(self.labels)
        above = [0] * n
        for i, m in enumerate(self.below):
            for j in bits(m):
                above[j] |= 1 << i
        self.above = tuple(above)
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != n:
            raise DuplicateLabel("labels must be distinct")
        self._levels = None

    # construction -----------------------------------------------------

    @classmethod
    def from_pairs(cls, labels: Iterable[Hashable], pairs: Iterable[tuple]) -> "Poset":
        labels = list(labels)
        index = {}
        for lab in labels:
            if lab in index:
                raise DuplicateLabel(f"duplicate label {lab!r}")
            index[lab] = len(index)
        n = len(labels)
        preds = [set() for _ in range(n)]
        succs = [set() for _ in range(n)]
        for a, b in pairs:
            if a not in index:
                raise UnknownElement(a)
            if b not in index:
                raise UnknownElement(b)
            i, j = index[a], index[b]
            if i == j:
                raise CycleError(f"{a!r} < {a!r}")
            preds[j].add(i)
            succs[i].add(j)
        indeg = [len(p) for p in preds]
        queue = [i for i in range(n) if indeg[i] == 0]
        order = []
        while queue:
            i = queue.pop()
            order.append(i)
            for j in succs[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    queue.append(j)
        if len(order) != n:
            raise CycleError("relation contains a cycle")
        below = [0] * n
        for i in order:
            m = 0
            for p in preds[i]:
                m |= below[p] | (1 << p)
            below[i] = m
        return cls(labels, below)

    @classmethod
    def from_relation(cls, labels: Sequence[Hashable], less: Callable[[Hashable, Hashable], bool]) -> "Poset":
        """Build from a strict-order predicate (assumed transitive)."""
        labels = list(labels)
        below = []
        for b in labels:
            m = 0
            for i, a in enumerate(labels):
                if a is not b and less(a, b):
                    m |= 1 << i
            below.append(m)
        p = cls(labels, below)
        for i in range(len(labels)):
            if p.below[i] >> i & 1:
                raise CycleError(f"{labels[i]!r} < itself")
            for j in bits(p.below[i]):
                if p.below[j] & ~p.below[i]:
                    raise PosetError("predicate is not transitive")
        return p

    @classmethod
    def empty(cls) -> "Poset":
        return cls((), ())

    # basic queries ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label) -> bool:
        return label in self._index

    def __repr__(self) -> str:
        return f"Poset(<{len(self)} elements>)"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poset):
            return NotImplemented
        if set(self.labels) != set(other.labels):
            return False
        return self.relations() == other.relations()

    def __hash__(self):
        return hash((frozenset(self.labels), frozenset(self.relations())))

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownElement(label) from None

    def less(self, a, b) -> bool:
        return bool(self.below[self.index(b)] >> self.index(a) & 1)

    def leq(self, a, b) -> bool:
        return a == b or self.less(a, b)

    def comparable(self, a, b) -> bool:
        return self.leq(a, b) or self.leq(b, a)

    def relations(self) -> set:
        """All strict pairs (a, b) with a < b, as labels."""
        return {(self.labels[j], self.labels[i]) for i, m in enumerate(self.below) for j in bits(m)}

    def cover_relations(self) -> list:
        out = []
        for i, m in enumerate(self.below):
            for j in bits(m):
                if not (self.above[j] & m):
                    out.append((self.labels[j], self.labels[i]))
        return out

    def mask_of(self, labels: Iterable) -> int:
        m = 0
        for lab in labels:
            m |= 1 << self.index(lab)
        return m

    def labels_of(self, mask: int) -> list:
        return [self.labels[i] for i in bits(mask)]

    # subposets --------------------------------------------------------

    def induced_mask(self, keep: int) -> "Poset":
        idx = list(bits(keep))
        new_pos = {old: new for new, old in enumerate(idx)}
        below = []
        for old in idx:
            m = 0
            for j in bits(self.below[old] & keep):
                m |= 1 << new_pos[j]
            below.append(m)
        return Poset([self.labels[i] for i in idx], below)

    def induced(self, labels: Iterable) -> "Poset":
        return self.induced_mask(self.mask_of(labels))

    def strictly_below(self, h) -> "Poset":
        return self.induced_mask(self.below[self.index(h)])

    def strictly_above(self, h) -> "Poset":
        return self.induced_mask(self.above[self.index(h)])

    def weakly_below(self, h) -> "Poset":
        i = self.index(h)
        return self.induced_mask(self.below[i] | 1 << i)

    def weakly_above(self, h) -> "Poset":
        i = self.index(h)
        return self.induced_mask(self.above[i] | 1 << i)

    def remove(self, labels: Iterable) -> "Poset":
        full = (1 << len(self)) - 1
        return self.induced_mask(full & ~self.mask_of(labels))

    def maximal_elements(self) -> list:
        return [lab for lab, up in zip(self.labels, self.above) if not up]

    def minimal_elements(self) -> list:
        return [lab for lab, dn in zip(self.labels, self.below) if not dn]

    def is_antichain(self, labels: Iterable) -> bool:
        m = self.mask_of(labels)
        return all(not (self.below[i] & m) for i in bits(m))

    def dual(self) -> "Poset":
        return Poset(self.labels, self.above)

    # levels -----------------------------------------------------------

    def heights(self) -> tuple:
        """Length of the longest chain strictly below each element."""
        if self._levels is None:
            n = len(self)
            h = [-1] * n
            order = sorted(range(n), key=lambda i: popcount(self.below[i]))
            for i in order:
                best = 0
                for j in bits(self.below[i]):
                    best = max(best, h[j] + 1)
                h[i] = best
            self._levels = tuple(h)
        return self._levels

    @property
    def dim(self) -> int:
        """Dimension of the order complex; -1 for the empty poset."""
        return max(self.heights(), default=-1)


@dataclass(frozen=True)
class LevelDecomposition:
    levels: tuple
    heights: dict

    @property
    def n(self) -> int:
        return len(self.levels) - 1

    def up_to(self, k: int) -> list:
        return [x for lev in self.levels[: k + 1] for x in lev]


def level_decomposition(p: Poset) -> LevelDecomposition:
    h = p.heights()
    levels = [[] for _ in range(p.dim + 1)]
    for i, k in enumerate(h):
        levels[k].append(p.labels[i])
    return LevelDecomposition(tuple(tuple(lev) for lev in levels), dict(zip(p.labels, h)))


@dataclass
class BoundedLattice:
    poset: Poset
    bottom: int
    top: int
    meet_table: list = field(repr=False)
    join_table: list = field(repr=False)

    def meet(self, a, b):
        p = self.poset
        return p.labels[self.meet_table[p.index(a)][p.index(b)]]

    def join(self, a, b):
        p = self.poset
        return p.labels[self.join_table[p.index(a)][p.index(b)]]

    @property
    def bottom_label(self):
        return self.poset.labels[self.bottom]

    @property
    def top_label(self):
        return self.poset.labels[self.top]

    def proper_part(self) -> Poset:
        return self.poset.remove([self.bottom_label, self.top_label])


def _extremum(p: Poset, common: int, upward: bool):
    # the greatest element of a set of lower bounds (or least of upper bounds)
    for i in bits(common):
        rest = common & ~(1 << i)
        rel = p.below[i] if upward else p.above[i]
        if rest & ~rel == 0:
            return i
    return None


def as_bounded_lattice(p: Poset) -> BoundedLattice:
    n = len(p)
    if n == 0:
        raise NotALattice(None, None, "bottom")
    meet = [[0] * n for _ in range(n)]
    join = [[0] * n for _ in range(n)]
    for a in range(n):
        lo_a = p.below[a] | 1 << a
        up_a = p.above[a] | 1 << a
        for b in range(a, n):
            lo = lo_a & (p.below[b] | 1 << b)
            m = _extremum(p, lo, upward=True)
            if m is None:
                raise NotALattice(p.labels[a], p.labels[b], "meet")
            up = up_a & (p.above[b] | 1 << b)
            j = _extremum(p, up, upward=False)
            if j is None:
                raise NotALattice(p.labels[a], p.labels[b], "join")
            meet[a][b] = meet[b][a] = m
            join[a][b] = join[b][a] = j
    mins = [i for i in range(n) if not p.below[i]]
    maxs = [i for i in range(n) if not p.above[i]]
    return BoundedLattice(p, mins[0], maxs[0], meet, join)


def complements(lat: BoundedLattice, z) -> list:
    """Elements x with meet(x, z) = bottom and join(x, z) = top."""
    p = lat.poset
    zi = p.index(z)
    if zi in (lat.bottom, lat.top):
        raise ImproperElement(f"{z!r} is the bottom or top")
    return [
        p.labels[x]
        for x in range(len(p))
        if lat.meet_table[x][zi] == lat.bottom and lat.join_table[x][zi] == lat.top
    ]


# text format --------------------------------------------------------------

def parse_poset(text: str) -> Poset:
    labels, pairs = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "e" and len(parts) == 2:
            labels.append(parts[1])
        elif parts[0] == "r" and len(parts) == 3:
            pairs.append((parts[1], parts[2]))
        else:
            raise PosetError(f"line {lineno}: cannot parse {raw!r}")
    return Poset.from_pairs(labels, pairs)


def format_poset(p: Poset) -> str:
    lines = [f"e {lab}" for lab in p.labels]
    lines += [f"r {a} {b}" for a, b in p.cover_relations()]
    return "\n".join(lines) + "\n"


def read_poset(path) -> Poset:
    with open(path, encoding="utf-8") as fh:
        return parse_poset(fh.read())


def write_poset(p: Poset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_poset(p))
