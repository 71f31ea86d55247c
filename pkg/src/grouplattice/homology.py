"""Exact integer homology via Smith normal form."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from .poset import Poset, bits
from .simplicial import ChainComplex, SimplicialComplex, chain_complex, order_complex, relative_chain_complex


class InvalidComplex(ValueError):
    pass


@dataclass(frozen=True)
class SNFResult:
    factors: tuple  # nonzero invariant factors d1 | d2 | ...

    @property
    def rank(self) -> int:
        return len(self.factors)

    @property
    def torsion(self) -> tuple:
        return tuple(d for d in self.factors if d > 1)


def _dense_snf(mat: list) -> list:
    """Nonzero diagonal of the Smith form of a dense integer matrix (destroys ``mat``)."""
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    diag = []
    t = 0
    while t < rows and t < cols:
        # pivot on the entry of least absolute value
        best = None
        for i in range(t, rows):
            r = mat[i]
            for j in range(t, cols):
                v = r[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        mat[t], mat[i] = mat[i], mat[t]
        if j != t:
            for r in mat:
                r[t], r[j] = r[j], r[t]
        while True:
            p = mat[t][t]
            done = True
            # clear column t
            for i in range(t + 1, rows):
                v = mat[i][t]
                if v:
                    q = v // p
                    ri, rt = mat[i], mat[t]
                    for j in range(t, cols):
                        if rt[j]:
                            ri[j] -= q * rt[j]
                    if ri[t]:
                        done = False
            # clear row t
            rt = mat[t]
            for j in range(t + 1, cols):
                v = rt[j]
                if v:
                    q = v // p
                    for r in mat[t:]:
                        if r[t]:
                            r[j] -= q * r[t]
                    if rt[j]:
                        done = False
            if done:
                # divisibility: p must divide every remaining entry
                bad = None
                for i in range(t + 1, rows):
                    for j in range(t + 1, cols):
                        if mat[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                rt, rb = mat[t], mat[bad]
                for j in range(t, cols):
                    rt[j] += rb[j]
                continue
            # bring the smallest nonzero entry of row/column t to the pivot
            best = (abs(p), t, t)
            for i in range(t + 1, rows):
                v = mat[i][t]
                if v and abs(v) < best[0]:
                    best = (abs(v), i, t)
            for j in range(t + 1, cols):
                v = mat[t][j]
                if v and abs(v) < best[0]:
                    best = (abs(v), t, j)
            _, i, j = best
            if i != t:
                mat[t], mat[i] = mat[i], mat[t]
            if j != t:
                for r in mat:
                    r[t], r[j] = r[j], r[t]
        diag.append(abs(mat[t][t]))
        t += 1
    return diag


def _normalize(diag: list) -> tuple:
    # the diagonal of the algorithm above already divides; recompute from gcd/lcm for safety
    d = [x for x in diag if x]
    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            g = math.gcd(d[i], d[j])
            if g != d[i]:
                d[i], d[j] = g, d[i] * d[j] // g
    return tuple(sorted(d))


def smith_normal_form(mat) -> SNFResult:
    """Invariant factors of an integer matrix given as a nested sequence."""
    rows = [[int(v) for v in r] for r in mat]
    return SNFResult(_normalize(_dense_snf(rows)))


def sparse_snf(columns: list, nrows: int) -> SNFResult:
    """Invariant factors of a sparse matrix given as a list of ``{row: value}`` columns.

    Unit pivots are eliminated first (they contribute factor 1 and never change
    the remaining invariant factors); the leftover block goes to the dense routine.
    """
    cols = {j: dict(c) for j, c in enumerate(columns) if c}
    rowidx: dict = {}
    for j, c in cols.items():
        for i in c:
            rowidx.setdefault(i, set()).add(j)
    units = 0
    order = sorted(cols, key=lambda j: len(cols[j]))
    pending = order
    while pending:
        progressed = False
        nxt = []
        for j in pending:
            c = cols.get(j)
            if c is None:
                continue
            if not c:
                del cols[j]
                continue
            piv = None
            for i, v in c.items():
                if v == 1 or v == -1:
                    cnt = len(rowidx[i])
                    if piv is None or cnt < piv[0]:
                        piv = (cnt, i, v)
                        if cnt == 1:
                            break
            if piv is None:
                nxt.append(j)
                continue
            _, r, pv = piv
            others = rowidx[r] - {j}
            for k in others:
                ck = cols[k]
                q = ck[r] * pv
                for i, v in c.items():
                    nv = ck.get(i, 0) - q * v
                    if nv:
                        if i not in ck:
                            rowidx[i].add(k)
                        ck[i] = nv
                    else:
                        if i in ck:
                            del ck[i]
                            rowidx[i].discard(k)
            for i in c:
                rowidx[i].discard(j)
            del cols[j]
            units += 1
            progressed = True
        if not progressed:
            break
        pending = sorted((j for j in nxt if j in cols), key=lambda j: len(cols[j]))
    rest = [c for c in cols.values() if c]
    if not rest:
        return SNFResult((1,) * units)
    used = sorted({i for c in rest for i in c})
    pos = {i: n for n, i in enumerate(used)}
    dense = [[0] * len(rest) for _ in used]
    for j, c in enumerate(rest):
        for i, v in c.items():
            dense[pos[i]][j] = v
    return SNFResult(tuple(sorted((1,) * units + _normalize(_dense_snf(dense)))))


@dataclass(frozen=True)
class HomologyGroup:
    rank: int = 0
    torsion: tuple = ()

    def is_zero(self) -> bool:
        return self.rank == 0 and not self.torsion

    def __add__(self, other: "HomologyGroup") -> "HomologyGroup":
        return HomologyGroup(self.rank + other.rank, _normalize(list(self.torsion + other.torsion)))

    def __mul__(self, n: int) -> "HomologyGroup":
        return HomologyGroup(self.rank * n, _normalize(list(self.torsion) * n))

    __rmul__ = __mul__

    def __str__(self):
        parts = []
        if self.rank:
            parts.append("Z" if self.rank == 1 else f"Z^{self.rank}")
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class HomologyProfile:
    """Homology per dimension; dimensions with zero groups are omitted."""

    groups: dict = field(default_factory=dict)
    reduced: bool = True

    def __getitem__(self, m: int) -> HomologyGroup:
        return self.groups.get(m, HomologyGroup())

    def rank(self, m: int) -> int:
        return self[m].rank

    def torsion(self, m: int) -> tuple:
        return self[m].torsion

    def is_zero(self) -> bool:
        return all(g.is_zero() for g in self.groups.values())

    def is_torsion_free(self) -> bool:
        return not any(g.torsion for g in self.groups.values())

    def betti(self) -> dict:
        return {m: g.rank for m, g in sorted(self.groups.items()) if g.rank}

    def euler(self) -> int:
        return sum((-1) ** m * g.rank for m, g in self.groups.items())

    def dims(self) -> list:
        return sorted(m for m, g in self.groups.items() if not g.is_zero())

    def __add__(self, other: "HomologyProfile") -> "HomologyProfile":
        keys = set(self.groups) | set(other.groups)
        return _profile({m: self[m] + other[m] for m in keys}, self.reduced)

    def __mul__(self, n: int) -> "HomologyProfile":
        return _profile({m: g * n for m, g in self.groups.items()}, self.reduced)

    __rmul__ = __mul__

    def shift(self, by: int) -> "HomologyProfile":
        return _profile({m + by: g for m, g in self.groups.items()}, self.reduced)

    def __eq__(self, other):
        if not isinstance(other, HomologyProfile):
            return NotImplemented
        return self.normalized() == other.normalized()

    def __hash__(self):
        return hash(tuple(sorted(self.normalized().items())))

    def normalized(self) -> dict:
        return {m: g for m, g in self.groups.items() if not g.is_zero()}

    def report(self) -> str:
        tag = "H~" if self.reduced else "H"
        if not self.dims():
            return f"{tag}[*] = 0"
        return "\n".join(f"{tag}[{m}] = {self[m]}" for m in self.dims())

    def to_dict(self) -> dict:
        return {str(m): {"rank": self[m].rank, "torsion": list(self[m].torsion)} for m in self.dims()}

    @classmethod
    def from_dict(cls, data: dict, reduced=True) -> "HomologyProfile":
        return _profile({int(m): HomologyGroup(v["rank"], tuple(v["torsion"])) for m, v in data.items()}, reduced)

    @classmethod
    def from_ranks(cls, ranks: dict, reduced=True) -> "HomologyProfile":
        return _profile({m: HomologyGroup(r) for m, r in ranks.items()}, reduced)


def _profile(groups: dict, reduced: bool) -> HomologyProfile:
    return HomologyProfile({m: g for m, g in sorted(groups.items()) if not g.is_zero()}, reduced)


EMPTY_REDUCED = HomologyProfile({-1: HomologyGroup(1)}, True)


def homology(c: ChainComplex, reduced: bool = True, check: bool = False) -> HomologyProfile:
    """Homology of a chain complex.

    For an absolute complex with ``reduced=True`` the augmentation C_0 -> Z is
    appended, so the empty complex has H~_{-1} = Z.  Relative complexes ignore
    ``reduced``: relative homology of a pair with nonempty subcomplex is already
    reduced.
    """
    if check and not c.check():
        raise InvalidComplex("boundary of boundary is nonzero")
    augment = reduced and not c.relative
    ranks = c.ranks
    if augment and not ranks:
        return EMPTY_REDUCED
    snf = {}
    for k in range(1, len(ranks)):
        snf[k] = sparse_snf(c.boundaries[k], ranks[k - 1])
    if augment:
        snf[0] = SNFResult((1,))
    groups = {}
    for k in range(len(ranks)):
        r_out = snf[k].rank if k in snf else 0
        r_in = snf[k + 1].rank if k + 1 in snf else 0
        tors = snf[k + 1].torsion if k + 1 in snf else ()
        groups[k] = HomologyGroup(ranks[k] - r_out - r_in, tors)
    return _profile(groups, reduced and not c.relative)


def complex_homology(x: SimplicialComplex, reduced: bool = True) -> HomologyProfile:
    return homology(chain_complex(x), reduced)


def relative_homology(c: ChainComplex) -> HomologyProfile:
    return homology(c, reduced=False)


def pair_homology(x: SimplicialComplex, a: SimplicialComplex) -> HomologyProfile:
    return relative_homology(relative_chain_complex(x, a))


def poset_homology(p: Poset, reduced: bool = True) -> HomologyProfile:
    """Homology of the order complex of ``p``."""
    return homology(chain_complex(order_complex(p)), reduced)


def reduced_euler(x: SimplicialComplex) -> int:
    """Alternating face count minus one; -1 for the empty complex."""
    return sum((-1) ** k * n for k, n in enumerate(x.f_vector())) - 1


def poset_reduced_euler(p: Poset) -> int:
    """Alternating chain count minus one, without materializing the complex."""
    n = len(p)
    # chains ending at each element, split by parity of length
    order = sorted(range(n), key=lambda i: bin(p.below[i]).count("1"))
    signed = [0] * n
    for i in order:
        # chains with top i: {i} alone, or chain below extended by i (flips sign)
        s = 1
        for j in bits(p.below[i]):
            s -= signed[j]
        signed[i] = s
    return sum(signed) - 1


def mobius_bottom_top(lat) -> int:
    """mu(bottom, top) by the recursive definition over the interval."""
    p = lat.poset
    n = len(p)
    order = sorted(range(n), key=lambda i: bin(p.below[i]).count("1"))
    mu = [0] * n
    for i in order:
        if i == lat.bottom:
            mu[i] = 1
            continue
        if not (p.below[i] >> lat.bottom & 1):
            continue
        mu[i] = -sum(mu[j] for j in bits(p.below[i]))
    return mu[lat.top]


def hdim(h: HomologyProfile) -> int:
    """Largest dimension with nonzero reduced homology (free or torsion), else -1."""
    return max((m for m in h.dims() if m >= 0), default=-1)
