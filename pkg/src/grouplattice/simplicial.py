"""Abstract simplicial complexes, order complexes and integer chain complexes."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Hashable, Iterable, Sequence

from .poset import Poset, bits


class EmptySummand(ValueError):
    pass


class NotASubcomplex(ValueError):
    pass


class SimplicialComplex:
    """Face-closed set of simplices over labelled vertices.

    Simplices are strictly increasing tuples of vertex indices; ``simplices[k]``
    is the sorted list of all k-simplices.
    """

    def __init__(self, vertex_labels: Sequence[Hashable], simplices: Sequence[Sequence[tuple]]):
        self.vertex_labels = tuple(vertex_labels)
        self.simplices = [sorted(set(s)) for s in simplices]
        while self.simplices and not self.simplices[-1]:
            self.simplices.pop()
        self._index = None

    @classmethod
    def from_maximal(cls, vertex_labels, maximal: Iterable[Iterable[int]]) -> "SimplicialComplex":
        faces: dict[int, set] = {}
        for s in maximal:
            s = tuple(sorted(s))
            for k in range(1, len(s) + 1):
                faces.setdefault(k - 1, set()).update(combinations(s, k))
        dim = max(faces, default=-1)
        return cls(vertex_labels, [faces[k] for k in range(dim + 1)])

    @classmethod
    def empty(cls) -> "SimplicialComplex":
        return cls((), [])

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    def f_vector(self) -> list:
        return [len(s) for s in self.simplices]

    def __len__(self):
        return sum(self.f_vector())

    def __repr__(self):
        return f"SimplicialComplex(f={self.f_vector()})"

    def is_empty(self) -> bool:
        return not self.simplices

    def index(self, k: int) -> dict:
        if self._index is None:
            self._index = [{s: i for i, s in enumerate(level)} for level in self.simplices]
        return self._index[k]

    def all_simplices(self):
        for level in self.simplices:
            yield from level

    def labelled(self) -> set:
        """Simplices as frozensets of vertex labels (relabeling-invariant form)."""
        lab = self.vertex_labels
        return {frozenset(lab[v] for v in s) for s in self.all_simplices()}

    def maximal_simplices(self) -> list:
        out = []
        for k, level in enumerate(self.simplices):
            if k + 1 < len(self.simplices):
                covered = set()
                for t in self.simplices[k + 1]:
                    covered.update(combinations(t, k + 1))
                out.extend(s for s in level if s not in covered)
            else:
                out.extend(level)
        return out

    def subcomplex_on(self, labels: Iterable) -> "SimplicialComplex":
        """Full subcomplex induced on a set of vertex labels (same vertex indexing)."""
        keep = {i for i, lab in enumerate(self.vertex_labels) if lab in set(labels)}
        return SimplicialComplex(self.vertex_labels, [[s for s in lev if keep.issuperset(s)] for lev in self.simplices])


def order_complex(p: Poset) -> SimplicialComplex:
    """Chains of ``p`` as simplices; vertex ``i`` is poset element ``i``."""
    levels: list[list[tuple]] = []

    def extend(chain, top):
        k = len(chain) - 1
        if k == len(levels):
            levels.append([])
        levels[k].append(tuple(sorted(chain)))
        for j in bits(p.above[top]):
            chain.append(j)
            extend(chain, j)
            chain.pop()

    for i in range(len(p)):
        extend([i], i)
    return SimplicialComplex(p.labels, levels)


def _shifted(x: SimplicialComplex, tag, offset) -> tuple:
    labels = [(tag, lab) for lab in x.vertex_labels]
    simplices = [tuple(v + offset for v in s) for s in x.all_simplices()]
    return labels, simplices


def join(x: SimplicialComplex, y: SimplicialComplex) -> SimplicialComplex:
    """Simplicial join; vertices are relabeled ``(0, a)`` and ``(1, b)``."""
    lx, sx = _shifted(x, 0, 0)
    ly, sy = _shifted(y, 1, len(lx))
    faces: dict[int, list] = {}
    for s in [()] + sx:
        for t in [()] + sy:
            u = s + t
            if u:
                faces.setdefault(len(u) - 1, []).append(u)
    dim = max(faces, default=-1)
    return SimplicialComplex(lx + ly, [faces[k] for k in range(dim + 1)])


def points(n: int) -> SimplicialComplex:
    return SimplicialComplex(range(n), [[(i,) for i in range(n)]] if n else [])


def suspension(x: SimplicialComplex) -> SimplicialComplex:
    return join(x, points(2))


def disjoint_union(xs: Sequence[SimplicialComplex]) -> SimplicialComplex:
    labels, faces, offset = [], {}, 0
    for i, x in enumerate(xs):
        lab, simp = _shifted(x, i, offset)
        labels += lab
        offset += len(lab)
        for s in simp:
            faces.setdefault(len(s) - 1, []).append(s)
    dim = max(faces, default=-1)
    return SimplicialComplex(labels, [faces[k] for k in range(dim + 1)])


def wedge(xs: Sequence[SimplicialComplex]) -> SimplicialComplex:
    """One-point union at the lowest-indexed vertex of every summand."""
    if any(x.is_empty() for x in xs):
        raise EmptySummand("wedge summands must be nonempty")
    labels = ["*"]
    faces: dict[int, list] = {}
    for i, x in enumerate(xs):
        remap = {0: 0}
        for v, lab in enumerate(x.vertex_labels):
            if v:
                remap[v] = len(labels)
                labels.append((i, lab))
        for s in x.all_simplices():
            faces.setdefault(len(s) - 1, []).append(tuple(sorted(remap[v] for v in s)))
    dim = max(faces, default=-1)
    return SimplicialComplex(labels, [faces[k] for k in range(dim + 1)])


def cone(x: SimplicialComplex) -> SimplicialComplex:
    return join(x, points(1))


@dataclass
class ChainComplex:
    """Free chain groups with sparse integer boundary matrices.

    ``bases[k]`` lists the k-simplices spanning C_k. ``boundaries[k]`` (k >= 1)
    is a list of columns, one per basis element of C_k, each a dict mapping a
    row index of C_{k-1} to its coefficient.  ``relative`` is true when the
    basis omits the simplices of a subcomplex.
    """

    bases: list
    boundaries: dict = field(repr=False)
    relative: bool = False

    @property
    def ranks(self) -> list:
        return [len(b) for b in self.bases]

    def dense(self, k: int) -> list:
        rows, cols = len(self.bases[k - 1]), len(self.bases[k])
        mat = [[0] * cols for _ in range(rows)]
        for j, col in enumerate(self.boundaries.get(k, ())):
            for i, v in col.items():
                mat[i][j] = v
        return mat

    def check(self) -> bool:
        """True iff every composite of consecutive boundaries vanishes."""
        for k in range(2, len(self.bases)):
            lower = self.boundaries[k - 1]
            for col in self.boundaries[k]:
                acc: dict = {}
                for i, v in col.items():
                    for r, w in lower[i].items():
                        acc[r] = acc.get(r, 0) + v * w
                if any(acc.values()):
                    return False
        return True


def _build(x: SimplicialComplex, skip=None) -> ChainComplex:
    bases = []
    for k, level in enumerate(x.simplices):
        bases.append([s for s in level if skip is None or s not in skip[k]] if skip else list(level))
    while bases and not bases[-1]:
        bases.pop()
    index = [{s: i for i, s in enumerate(b)} for b in bases]
    boundaries = {}
    for k in range(1, len(bases)):
        lower = index[k - 1]
        cols = []
        for s in bases[k]:
            col = {}
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                row = lower.get(face)
                if row is not None:
                    col[row] = -1 if i & 1 else 1
            cols.append(col)
        boundaries[k] = cols
    return ChainComplex(bases, boundaries, relative=skip is not None)


def chain_complex(x: SimplicialComplex) -> ChainComplex:
    return _build(x)


def relative_chain_complex(x: SimplicialComplex, a: SimplicialComplex) -> ChainComplex:
    """Chains of ``x`` modulo the subcomplex ``a`` (matched by vertex label)."""
    pos = {lab: i for i, lab in enumerate(x.vertex_labels)}
    skip = [set() for _ in range(max(x.dim, a.dim) + 1)]
    for s in a.all_simplices():
        try:
            t = tuple(sorted(pos[a.vertex_labels[v]] for v in s))
        except KeyError:
            raise NotASubcomplex(f"vertex of {s} not in the ambient complex") from None
        if len(t) - 1 > x.dim or t not in x.index(len(t) - 1):
            raise NotASubcomplex(f"simplex {s} not in the ambient complex")
        skip[len(t) - 1].add(t)
    return _build(x, skip)


def format_complex(x: SimplicialComplex) -> str:
    lab = x.vertex_labels
    return "".join(" ".join(str(lab[v]) for v in s) + "\n" for s in sorted(x.maximal_simplices()))
