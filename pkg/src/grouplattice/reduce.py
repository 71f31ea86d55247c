"""Homotopy-preserving poset reductions, each checked at the level of integer homology.

None of these functions decides a homotopy hypothesis. Every reduction is
paired with a direct homology comparison, so a mismatch means the hypothesis
failed for that input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Optional

from .groups import SubgroupTable, catalog_group, all_subgroups, subgroup_lattice_proper
from .homology import HomologyProfile, complex_homology, poset_homology, reduced_euler
from .poset import Poset, as_bounded_lattice, complements
from .simplicial import SimplicialComplex, join, order_complex, suspension


class MeetUnavailable(LookupError):
    pass


class NotAnAntichain(ValueError):
    pass


Meet = Callable[[Hashable, Hashable], Hashable]


def meet_closure_of_maximal(p: Poset, meet: Meet, bottom: Hashable) -> list:
    """All meets of nonempty sets of maximal elements, except ``bottom``."""
    found = set(p.maximal_elements())
    frontier = list(found)
    maximal = list(found)
    while frontier:
        nxt = []
        for x in frontier:
            for c in maximal:
                y = meet(x, c)
                if y == bottom or y in found:
                    continue
                if y not in p:
                    raise MeetUnavailable(f"meet of {x!r} and {c!r} is {y!r}, not in the poset")
                found.add(y)
                nxt.append(y)
        frontier = nxt
    return [x for x in p.labels if x in found]


def coatom_meet_reduction(p: Poset, meet: Meet, bottom: Hashable) -> Poset:
    """Subposet of intersections of maximal elements (homotopy equivalent to ``p``).

    ``meet`` is the meet of the ambient lattice and ``bottom`` its least element.
    """
    return p.induced(meet_closure_of_maximal(p, meet, bottom))


def subgroup_meet(table: SubgroupTable) -> tuple:
    """(meet, bottom) pair for posets whose labels are subgroup ids of ``table``."""
    return table.meet, table.trivial


@dataclass
class WedgeSummand:
    element: Hashable
    lower: SimplicialComplex
    upper: SimplicialComplex

    def complex(self) -> SimplicialComplex:
        return suspension(join(self.lower, self.upper))


@dataclass
class WedgeDecomposition:
    remainder: Poset
    summands: list


def remove_antichain(p: Poset, m: Iterable) -> WedgeDecomposition:
    m = list(m)
    if not p.is_antichain(m):
        raise NotAnAntichain("elements to remove are pairwise comparable")
    summands = [WedgeSummand(x, order_complex(p.strictly_below(x)), order_complex(p.strictly_above(x))) for x in m]
    return WedgeDecomposition(p.remove(m), summands)


@dataclass
class WedgeReport:
    actual: HomologyProfile
    remainder: HomologyProfile
    summands: HomologyProfile
    expected: HomologyProfile
    equal: bool

    def mismatches(self) -> dict:
        dims = set(self.actual.dims()) | set(self.expected.dims())
        return {m: (str(self.actual[m]), str(self.expected[m])) for m in sorted(dims) if self.actual[m] != self.expected[m]}


def summand_homology(d: WedgeDecomposition) -> HomologyProfile:
    total = HomologyProfile({}, True)
    for s in d.summands:
        total = total + complex_homology(s.complex())
    return total


def verify_wedge_homology(p: Poset, d: WedgeDecomposition, actual: Optional[HomologyProfile] = None) -> WedgeReport:
    actual = poset_homology(p) if actual is None else actual
    rem = poset_homology(d.remainder)
    summ = summand_homology(d)
    if not d.remainder.labels:
        # the wedge with an empty remainder is just the summands
        expected = summ
    else:
        expected = rem + summ
    return WedgeReport(actual, rem, summ, expected, actual == expected)


# PSL(2,7) ---------------------------------------------------------------

@dataclass
class Step:
    name: str
    size: int
    homology: HomologyProfile
    ok: bool
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"step": self.name, "size": self.size, "homology": self.homology.to_dict(), "ok": self.ok, **self.notes}


@dataclass
class PipelineReport:
    steps: list
    final: HomologyProfile
    choice: Optional[str]
    ok: bool
    attempts: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "class_choice": self.choice,
            "final_homology": self.final.to_dict(),
            "steps": [s.to_dict() for s in self.steps],
            "attempts": self.attempts,
        }


def _class_members(table: SubgroupTable, p: Poset, label: str) -> list:
    labels = table.class_labels()
    return [x for x in p.labels if labels[table.class_of[x]] == label]


def _classes_present(table: SubgroupTable, p: Poset) -> set:
    labels = table.class_labels()
    return {labels[table.class_of[x]] for x in p.labels}


def psl27_pipeline(table: SubgroupTable | None = None, remove_class: str | None = None,
                   skip_reduction: bool = False) -> PipelineReport:
    """Reduce the subgroup lattice of PSL(2,7) to a point, isolating its spheres.

    Steps: meets of maximal subgroups; drop the F21 class; drop all but one
    member of an S4 class; meets of maximal elements again; complement of
    the kept S4.  ``remove_class`` forces the class used in the third step
    (a class label such as ``S4a``); by default both S4 classes are tried.
    """
    if table is None:
        table = all_subgroups(catalog_group("PSL27"))
    meet, bottom = subgroup_meet(table)
    lg = subgroup_lattice_proper(table)
    h_lg = poset_homology(lg)
    steps = [Step("subgroup lattice", len(lg), h_lg, True,
                  {"euler": reduced_euler(order_complex(lg))})]
    if skip_reduction:
        ok = h_lg.betti() == {1: 48, 2: 48} and h_lg.is_torsion_free()
        return PipelineReport(steps, h_lg, None, ok)

    q = coatom_meet_reduction(lg, meet, bottom)
    h_q = poset_homology(q)
    dropped = sorted(_classes_present(table, lg) - _classes_present(table, q))
    again = coatom_meet_reduction(q, meet, bottom)
    steps.append(Step("meets of maximal subgroups", len(q), h_q, h_q == h_lg,
                      {"dropped_classes": dropped, "idempotent": len(again) == len(q)}))

    f21 = _class_members(table, q, "F21")
    d1 = remove_antichain(q, f21)
    rep1 = verify_wedge_homology(q, d1, h_q)
    fiber_sizes = sorted({len(s.lower.vertex_labels) for s in d1.summands})
    q1 = d1.remainder
    h_q1 = rep1.remainder
    steps.append(Step("remove F21 class", len(q1), h_q1, rep1.equal,
                      {"removed": len(f21), "lower_fiber_sizes": fiber_sizes,
                       "isolated": rep1.summands.to_dict(), "euler": reduced_euler(order_complex(q1))}))

    labels = table.class_labels()
    present = _classes_present(table, q1)
    s4_labels = [labels[c] for c in range(len(table.classes)) if table.class_name(c) == "S4" and labels[c] in present]
    candidates = [remove_class] if remove_class else s4_labels
    attempts = []
    best = None
    for label in candidates:
        members = _class_members(table, q1, label)
        if not members:
            attempts.append({"class": label, "ok": False, "reason": "class not present"})
            continue
        keep, drop = members[0], members[1:]
        try:
            d2 = remove_antichain(q1, drop)
        except NotAnAntichain:
            attempts.append({"class": label, "ok": False, "reason": "not an antichain"})
            continue
        rep2 = verify_wedge_homology(q1, d2, h_q1)
        q2 = d2.remainder
        fibers = [s.lower for s in d2.summands]
        fiber_euler = sorted({reduced_euler(f) for f in fibers})
        fiber_f = sorted({tuple(f.f_vector()) for f in fibers})
        sub = []
        try:
            q3 = coatom_meet_reduction(q2, meet, bottom)
        except MeetUnavailable as e:
            attempts.append({"class": label, "ok": False, "reason": str(e)})
            continue
        h_q3 = poset_homology(q3)
        # S is maximal in q2, so it survives the reduction; complement taken in q3 + {1, G}
        perp = subgroup_complement(table, q3, keep)
        perp2 = subgroup_complement(table, q2, keep)
        sub.append(Step(f"remove {len(drop)} of class {label}", len(q2), rep2.remainder, rep2.equal,
                        {"kept": keep, "lower_fiber_euler": fiber_euler, "lower_fiber_f_vectors": [list(f) for f in fiber_f],
                         "isolated": rep2.summands.to_dict()}))
        sub.append(Step("meets of maximal elements", len(q3), h_q3, h_q3 == rep2.remainder,
                        {"complement_of_kept": len(perp), "complement_in_unreduced": len(perp2)}))
        ok = rep2.equal and h_q3.is_zero() and rep2.remainder.is_zero() and not perp
        attempts.append({"class": label, "ok": ok})
        if best is None or (ok and not best[0]):
            best = (ok, label, sub)
        if ok:
            break
    if best is None:
        return PipelineReport(steps, h_lg, None, False, attempts)
    ok, label, sub = best
    steps.extend(sub)
    isolated = rep1.summands + HomologyProfile.from_dict(sub[0].notes["isolated"])
    final_ok = (
        ok
        and all(s.ok for s in steps)
        and dropped == sorted(["A4a", "A4b", "Z4", "Z7"])
        and isolated == h_lg
        and h_lg.betti() == {1: 48, 2: 48}
    )
    return PipelineReport(steps, isolated, label, final_ok, attempts)


def subgroup_complement(table: SubgroupTable, p: Poset, z) -> list:
    """Complement of ``z`` in the lattice ``p`` plus trivial subgroup and whole group."""
    bottom, top = table.trivial, table.whole
    labels = [bottom] + list(p.labels) + [top]
    lattice = Poset.from_relation(labels, lambda a, b: a != b and table.leq(a, b))
    return complements(as_bounded_lattice(lattice), z)
