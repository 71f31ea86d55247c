"""Level-filtration spectral sequence bookkeeping: E1 page, Betti bounds, decreasing posets.

Differentials are never computed as maps.  Everything here is derived from
the reduced homology of the lower fibers ``P_{<h}``; the H~_{-1}(empty) = Z
convention makes minimal elements count in every formula without special cases.
"""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Hashable, Optional

import numpy as np
from scipy.optimize import linprog

from .groups import (DEFAULT_MAX_POSET, SubgroupTable, coset_poset, subgroup_lattice_proper)
from .homology import (EMPTY_REDUCED, HomologyGroup, HomologyProfile, hdim, pair_homology, poset_homology)
from .poset import Poset, bits, level_decomposition
from .simplicial import order_complex

LATTICES = ("L", "C", "S")


# fibers -----------------------------------------------------------------

def fiber_homologies(p: Poset, key: Optional[Callable[[Hashable], Hashable]] = None) -> dict:
    """Reduced homology of every lower fiber, computed once per ``key`` value."""
    cache: dict = {}
    out = {}
    for i, h in enumerate(p.labels):
        k = key(h) if key else h
        if k not in cache:
            cache[k] = poset_homology(p.induced_mask(p.below[i]))
        out[h] = cache[k]
    return out


@dataclass
class FiberClass:
    """Lower fibers sharing one isomorphism type."""

    label: str
    count: int  # number of poset elements with this fiber
    level: int  # filtration level of those elements
    homology: HomologyProfile
    order: int = 0  # subgroup order, for group posets


def poset_fiber_classes(p: Poset, fibers: Optional[dict] = None) -> list:
    fibers = fiber_homologies(p) if fibers is None else fibers
    heights = p.heights()
    return [FiberClass(str(h), 1, heights[i], fibers[h]) for i, h in enumerate(p.labels)]


def _sub_poset(table: SubgroupTable, h: int, which: str) -> Poset:
    subs = table.subgroups_of(h)
    if which == "L":
        inner = [s for s in subs if s not in (table.trivial, h)]
        m = {s: k for k, s in enumerate(inner)}
        below = [sum(1 << m[t] for t in inner if t != s and table.leq(t, s)) for s in inner]
        return Poset(inner, below)
    if h == table.trivial:
        return Poset.empty()
    return coset_poset(table, punctured=(which == "S"), subgroups=subs).poset


def _fiber_job(sub: Poset) -> tuple:
    return poset_homology(sub), sub.dim


def group_fiber_classes(table: SubgroupTable, which: str, fiber_cache: Optional[dict] = None, jobs: int = 1) -> list:
    """Fiber types of the subgroup lattice (L), coset poset (C) or punctured coset poset (S).

    Every element of the poset sits over a subgroup H, and its lower fiber is
    the corresponding poset of H.  Multiplicity is the class size, times the
    index |G:H| for the coset posets.
    """
    if which not in LATTICES:
        raise ValueError(f"lattice must be one of {LATTICES}")
    labels = table.class_labels()
    wanted = []
    for c, members in enumerate(table.classes):
        h = members[0]
        if h == table.whole or (which in ("L", "S") and h == table.trivial):
            continue
        wanted.append(c)
    cache = {} if fiber_cache is None else fiber_cache
    todo = [c for c in wanted if (which, c) not in cache]
    subs = [_sub_poset(table, table.classes[c][0], which) for c in todo]
    if jobs > 1 and len(subs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_fiber_job, subs))
    else:
        results = [_fiber_job(sub) for sub in subs]
    cache.update({(which, c): r for c, r in zip(todo, results)})
    out = []
    for c in wanted:
        h = table.classes[c][0]
        hom, dim = cache[(which, c)]
        mult = len(table.classes[c]) * (1 if which == "L" else table.index(h))
        out.append(FiberClass(labels[c], mult, dim + 1, hom, table.orders[h]))
    return out


# E1 page ----------------------------------------------------------------

@dataclass
class E1Page:
    cells: dict  # (k, l) -> HomologyGroup
    n: int

    def __getitem__(self, kl) -> HomologyGroup:
        return self.cells.get(kl, HomologyGroup())

    def diagonal_rank(self, m: int) -> int:
        return sum(g.rank for (k, l), g in self.cells.items() if k + l == m)

    def diagonal_torsion_free(self, m: int) -> bool:
        return all(not g.torsion for (k, l), g in self.cells.items() if k + l == m)

    def diagonals(self) -> dict:
        out: dict = defaultdict(int)
        for (k, l), g in self.cells.items():
            out[k + l] += g.rank
        return dict(sorted(out.items()))

    def euler(self) -> int:
        """Euler characteristic (unreduced) of the filtered complex."""
        return sum((-1) ** (k + l) * g.rank for (k, l), g in self.cells.items())

    def table(self) -> str:
        if not self.cells:
            return "(empty)"
        ls = sorted({l for _, l in self.cells})
        lines = []
        for l in reversed(ls):
            row = [str(self[(k, l)]) for k in range(self.n + 1)]
            lines.append(f"l={l:>2} | " + " | ".join(f"{c:>10}" for c in row))
        lines.append("       " + " | ".join(f"{'k=' + str(k):>10}" for k in range(self.n + 1)))
        return "\n".join(lines)


def e1_from_fibers(classes: list) -> E1Page:
    cells: dict = defaultdict(HomologyGroup)
    n = -1
    for fc in classes:
        n = max(n, fc.level)
        if fc.level == 0:
            cells[(0, 0)] = cells[(0, 0)] + HomologyGroup(fc.count)
            continue
        for d, grp in fc.homology.groups.items():
            if d < 0 or grp.is_zero():
                continue
            k = fc.level
            cells[(k, d + 1 - k)] = cells[(k, d + 1 - k)] + grp * fc.count
    return E1Page({kl: g for kl, g in sorted(cells.items()) if not g.is_zero()}, n)


def e1_page(p: Poset, fibers: Optional[dict] = None) -> E1Page:
    """E1 of the level filtration: column k collects H~_{k+l-1} of the fibers over level k."""
    return e1_from_fibers(poset_fiber_classes(p, fibers))


def group_e1_page(table: SubgroupTable, which: str, fiber_cache=None, jobs: int = 1) -> E1Page:
    return e1_from_fibers(group_fiber_classes(table, which, fiber_cache, jobs))


def filtration_pair_homology(p: Poset, k: int) -> HomologyProfile:
    """Relative homology of (Delta P^{<=k}, Delta P^{<=k-1})."""
    ld = level_decomposition(p)
    upper = p.induced(ld.up_to(k))
    lower = p.induced(ld.up_to(k - 1)) if k > 0 else Poset.empty()
    return pair_homology(order_complex(upper), order_complex(lower))


def filtration_pair_formula(p: Poset, k: int, fibers: Optional[dict] = None) -> HomologyProfile:
    """Sum of the suspended lower fibers over level k (empty fibers give Z in dimension 0)."""
    fibers = fiber_homologies(p) if fibers is None else fibers
    heights = p.heights()
    total = HomologyProfile({}, False)
    for i, h in enumerate(p.labels):
        if heights[i] == k:
            total = total + HomologyProfile(fibers[h].groups, False).shift(1)
    return total


def e1_two_step(p: Poset, base) -> E1Page:
    """E1 of the filtration  Delta(base) <= Delta(p)  for a down-closed ``base`` whose complement is an antichain.

    Column 0 is the (unreduced) homology of the base; column 1 collects
    H~_{l}(P_{<h}) over the top elements h.
    """
    base = list(base)
    bp = p.induced(base)
    tops = [h for h in p.labels if h not in set(base)]
    if not p.is_antichain(tops):
        raise ValueError("elements outside the base must form an antichain")
    cells: dict = defaultdict(HomologyGroup)
    for d, g in poset_homology(bp, reduced=False).groups.items():
        cells[(0, d)] = cells[(0, d)] + g
    for h in tops:
        for d, g in poset_homology(p.strictly_below(h)).groups.items():
            if d >= 0:
                cells[(1, d)] = cells[(1, d)] + g
    return E1Page({kl: g for kl, g in sorted(cells.items()) if not g.is_zero()}, 1)


# Betti bounds -------------------------------------------------------------

def diagonal_totals(classes: list) -> dict:
    """m -> sum over elements of rank H~_{m-1}(fiber)  (empty fibers count in m = 0)."""
    out: dict = defaultdict(int)
    for fc in classes:
        for d, g in fc.homology.groups.items():
            if g.rank:
                out[d + 1] += g.rank * fc.count
    return dict(sorted(out.items()))


def betti_upper(p: Poset, m: int, fibers: Optional[dict] = None) -> int:
    """Upper bound for rank H_m(P) (unreduced) from lower-fiber homology."""
    return diagonal_totals(poset_fiber_classes(p, fibers)).get(m, 0)


def lower_from_totals(totals: dict, m: int) -> int:
    return totals.get(m, 0) - totals.get(m + 1, 0) - totals.get(m - 1, 0)


def betti_lower(p: Poset, m: int, fibers: Optional[dict] = None) -> int:
    """Lower bound for rank H_m(P) (unreduced); often negative, returned unclamped."""
    return lower_from_totals(diagonal_totals(poset_fiber_classes(p, fibers)), m)


def refined_bounds(totals: dict, known: Optional[dict] = None, top: Optional[int] = None) -> dict:
    """Tightest rank intervals for H_m consistent with the E1 diagonal totals.

    Writing x_m for the total rank of all differentials from diagonal m to
    diagonal m-1, rank H_m = D_m - x_m - x_{m+1} with x >= 0 and every rank
    nonnegative.  ``known`` fixes some unreduced ranks.  Each bound is the
    optimum of a small linear program.
    """
    known = dict(known or {})
    top = max(list(totals) + list(known) + [0]) if top is None else top
    dims = list(range(top + 1))
    nx = top + 1  # x_1 .. x_{top+1}; x_{top+1} is forced to 0
    D = [totals.get(m, 0) for m in dims]

    def row(m):
        r = np.zeros(nx)
        if m >= 1:
            r[m - 1] = 1.0
        if m + 1 <= top:
            r[m] = 1.0
        return r

    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for m in dims:
        if m in known:
            a_eq.append(row(m))
            b_eq.append(D[m] - known[m])
        else:
            a_ub.append(row(m))
            b_ub.append(D[m])
    bounds = [(0, None)] * top + [(0, 0)]
    kw = dict(A_ub=np.array(a_ub) if a_ub else None, b_ub=b_ub or None,
              A_eq=np.array(a_eq) if a_eq else None, b_eq=b_eq or None, bounds=bounds, method="highs")
    out = {}
    for m in dims:
        if m in known:
            out[m] = (known[m], known[m])
            continue
        lo = linprog(-row(m), **kw)
        hi = linprog(row(m), **kw)
        if lo.status != 0 or hi.status != 0:
            raise ValueError("known ranks are inconsistent with the E1 page")
        out[m] = (int(round(D[m] + lo.fun)), int(round(D[m] - hi.fun)))
    return out


def reduced_to_unreduced(facts: dict, nonempty: bool = True) -> dict:
    return {m: r + (1 if m == 0 and nonempty else 0) for m, r in facts.items()}


@dataclass
class BoundTable:
    totals: dict
    raw_upper: dict
    raw_lower: dict
    refined: dict
    facts: dict
    conclusions: dict = field(default_factory=dict)

    def rows(self, actual: Optional[HomologyProfile] = None) -> list:
        out = []
        for m in sorted(self.refined):
            lo, hi = self.refined[m]
            row = {"m": m, "upper": self.raw_upper.get(m, 0), "lower": self.raw_lower.get(m, 0),
                   "lower_clamped": max(0, self.raw_lower.get(m, 0)), "refined_lower": lo, "refined_upper": hi}
            if actual is not None:
                row["actual"] = actual.rank(m) + (1 if m == 0 else 0)
            out.append(row)
        return out


def bound_table(classes: list, facts: Optional[dict] = None, nonempty: bool = True, dim: Optional[int] = None) -> BoundTable:
    """Raw and fact-refined bounds for every unreduced Betti number.

    ``facts`` are reduced ranks supplied by the caller (for example
    ``{0: 0, 1: 0}`` for a simply connected poset); they are inputs, never
    computed claims.  Vanishing conclusions from the fibers are added
    automatically.
    """
    totals = diagonal_totals(classes)
    top = max(list(totals) + [dim + 1 if dim is not None else 0])
    facts = dict(facts or {})
    known = reduced_to_unreduced(facts, nonempty)
    conclusions = {}
    for m in range(top + 1):
        vt = _vanishing_from_classes(classes, m)
        conclusions[m] = vt
        if vt["vanishes_above"] and m + 1 not in known:
            known[m + 1] = 0
    known = {m: r for m, r in known.items() if m <= top}
    refined = refined_bounds(totals, known, top)
    raw_upper = {m: totals.get(m, 0) for m in range(top + 1)}
    raw_lower = {m: lower_from_totals(totals, m) for m in range(top + 1)}
    return BoundTable(totals, raw_upper, raw_lower, refined, facts, conclusions)


def group_betti_bounds(table: SubgroupTable, which: str, m: int, facts: Optional[dict] = None,
                       fiber_cache: Optional[dict] = None) -> int:
    """Upper bound for rank H_m of L(G), C(G) or S(G) from proper-subgroup fibers.

    Without ``facts`` this is the weighted sum over subgroups (class size,
    times |G:H| for coset posets).  With reduced-rank facts the bound is
    sharpened by the diagonal bookkeeping of :func:`refined_bounds`.
    """
    classes = group_fiber_classes(table, which, fiber_cache)
    totals = diagonal_totals(classes)
    if not facts:
        return totals.get(m, 0)
    bt = bound_table(classes, facts)
    return bt.refined.get(m, (0, 0))[1]


# vanishing and torsion ------------------------------------------------------

def _vanishing_from_classes(classes: list, m: int) -> dict:
    nonempty_fibers = [fc for fc in classes]
    vanish = all(fc.homology[m].is_zero() for fc in nonempty_fibers)
    tfree = all(not fc.homology[m - 1].torsion for fc in nonempty_fibers)
    fiber_hdims = [hdim(fc.homology) for fc in classes]
    return {
        "m": m,
        "fibers_vanish": vanish,
        "vanishes_above": vanish,  # conclusion: H_{m+1} = 0
        "fibers_torsion_free_below": tfree,
        "torsion_free": tfree,  # conclusion: H_m torsion-free
        "hdim_bound": 1 + max(fiber_hdims, default=-2),
    }


def vanishing_and_torsion(p: Poset, m: int, fibers: Optional[dict] = None) -> dict:
    """Conclusions about H_{m+1} = 0 and torsion in H_m, plus the Hdim bound, from fibers."""
    rep = _vanishing_from_classes(poset_fiber_classes(p, fibers), m)
    rep["concludes"] = []
    if rep["vanishes_above"]:
        rep["concludes"].append(f"H[{m + 1}] = 0")
    if rep["torsion_free"]:
        rep["concludes"].append(f"H[{m}] torsion-free")
    return rep


def group_vanishing_and_torsion(table: SubgroupTable, which: str, m: int, fiber_cache=None) -> dict:
    rep = _vanishing_from_classes(group_fiber_classes(table, which, fiber_cache), m)
    rep["concludes"] = []
    if rep["vanishes_above"]:
        rep["concludes"].append(f"H[{m + 1}] = 0")
    if rep["torsion_free"]:
        rep["concludes"].append(f"H[{m}] torsion-free")
    return rep


# decreasing posets --------------------------------------------------------

@dataclass
class DecreasingVerdict:
    is_decreasing: bool
    s: int
    hdim: int
    dim: int
    level_flags: tuple = ()
    hdim_bound_ok: bool = True  # Hdim <= dim - s
    lemma_ok: bool = True  # some decreasing level  =>  Hdim <= dim - 1

    def to_dict(self) -> dict:
        return {"decreasing": self.is_decreasing, "s": self.s, "hdim": self.hdim, "dim": self.dim,
                "decreasing_levels": [k for k, f in enumerate(self.level_flags) if f],
                "hdim_bound_ok": self.hdim_bound_ok, "lemma_ok": self.lemma_ok}


def _verdict(hd: int, dim: int, flags: list) -> DecreasingVerdict:
    s = sum(flags)
    return DecreasingVerdict(
        is_decreasing=hd <= dim - s - 1,
        s=s, hdim=hd, dim=dim, level_flags=tuple(flags),
        hdim_bound_ok=hd <= dim - s,
        lemma_ok=(s == 0 or hd <= dim - 1),
    )


class DecreasingClassifier:
    """Memoized verdicts for a poset and all of its principal lower ideals."""

    def __init__(self, p: Poset, fibers: Optional[dict] = None):
        self.p = p
        self.fibers = fiber_homologies(p) if fibers is None else fibers
        self.heights = p.heights()
        self._fiber_verdicts: dict = {}

    def fiber(self, i: int) -> DecreasingVerdict:
        """Verdict for P_{<h} where h has index ``i``."""
        if i not in self._fiber_verdicts:
            p = self.p
            below = p.below[i]
            hk = self.heights[i]
            flags = []
            for k in range(hk):
                flags.append(all(self.fiber(j).is_decreasing for j in bits(below) if self.heights[j] == k))
            self._fiber_verdicts[i] = _verdict(hdim(self.fibers[p.labels[i]]), hk - 1, flags)
        return self._fiber_verdicts[i]

    def level_flags(self) -> list:
        p = self.p
        flags = [True] * (p.dim + 1)
        for i in sorted(range(len(p)), key=lambda i: self.heights[i]):
            if not self.fiber(i).is_decreasing:
                flags[self.heights[i]] = False
        return flags

    def verdict(self, homology: Optional[HomologyProfile] = None) -> DecreasingVerdict:
        h = poset_homology(self.p) if homology is None else homology
        return _verdict(hdim(h), self.p.dim, self.level_flags())

    def all_verdicts(self) -> list:
        return [self.fiber(i) for i in range(len(self.p))]


def is_decreasing(p: Poset, homology: Optional[HomologyProfile] = None, fibers: Optional[dict] = None) -> DecreasingVerdict:
    return DecreasingClassifier(p, fibers).verdict(homology)


def decreasing_sufficiency(p: Poset, k: int, classifier: Optional[DecreasingClassifier] = None) -> dict:
    """Check whether the sufficient condition at level ``k`` certifies P decreasing.

    The condition: level k is not decreasing, and every fiber over level k is
    either decreasing or has more than s_k decreasing levels, s_k being the
    number of decreasing levels of P strictly below k.
    """
    if not 0 <= k <= p.dim:
        return {"level": k, "certified": False, "reason": "no such level"}
    cl = classifier or DecreasingClassifier(p)
    flags = cl.level_flags()
    s_k = sum(flags[:k])
    per = []
    for i in range(len(p)):
        if cl.heights[i] != k:
            continue
        v = cl.fiber(i)
        per.append({"element": p.labels[i], "fiber_decreasing": v.is_decreasing, "fiber_s": v.s,
                    "ok": v.is_decreasing or v.s >= s_k + 1})
    certified = (not flags[k]) and all(e["ok"] for e in per)
    return {"level": k, "level_decreasing": flags[k], "s_k": s_k, "elements": per, "certified": certified,
            "reason": "certified" if certified else ("level is decreasing" if flags[k] else "some fiber fails both alternatives")}


# L / C / S relations ---------------------------------------------------------

def lcs_relation_check(table: SubgroupTable, max_poset: int = DEFAULT_MAX_POSET) -> dict:
    """Relative homology of (C G, S G) against |G| suspended copies of L G, plus rank inequalities."""
    order = table.group.order
    lg = subgroup_lattice_proper(table)
    cg = coset_poset(table, punctured=False, max_poset=max_poset).poset
    sg = coset_poset(table, punctured=True, max_poset=max_poset).poset
    h_l, h_c, h_s = poset_homology(lg), poset_homology(cg), poset_homology(sg)
    rel = pair_homology(order_complex(cg), order_complex(sg))
    expected = (HomologyProfile(h_l.groups, False) * order).shift(1)
    inequalities = []
    top = cg.dim + 1
    for m in range(0, top + 1):
        if not sg.labels or not h_s[m].is_zero():
            continue
        inequalities.append({"m": m, "kind": "injection", "lhs": h_c.rank(m), "rhs": order * h_l.rank(m - 1),
                             "holds": h_c.rank(m) <= order * h_l.rank(m - 1)})
        inequalities.append({"m": m + 1, "kind": "surjection", "lhs": h_c.rank(m + 1), "rhs": order * h_l.rank(m),
                             "holds": h_c.rank(m + 1) >= order * h_l.rank(m)})
    n = lg.dim
    corollary = {"n": n, "lhs": h_c.rank(n + 1), "rhs": order * h_l.rank(n), "holds": h_c.rank(n + 1) <= order * h_l.rank(n),
                 "dim_C": cg.dim, "dim_C_is_n_plus_1": cg.dim == n + 1}
    return {
        "order": order,
        "L": h_l, "C": h_c, "S": h_s,
        "relative": rel, "expected_relative": expected,
        "relative_matches": rel == expected,
        "inequalities": inequalities,
        "corollary": corollary,
        "ok": rel == expected and all(i["holds"] for i in inequalities) and corollary["holds"],
    }
