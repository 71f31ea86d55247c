"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""
import time

import pytest

from grouplattice.groups import CATALOG, SOLVABLE, all_subgroups, catalog_group, coset_poset, subgroup_lattice_full, \
    subgroup_lattice_proper
from grouplattice.homology import hdim, mobius_bottom_top, poset_homology, reduced_euler
from grouplattice.poset import Poset, as_bounded_lattice
from grouplattice.reduce import psl27_pipeline
from grouplattice.simplicial import order_complex
from grouplattice.spectral import (betti_lower, betti_upper, fiber_homologies, filtration_pair_formula,
                                   filtration_pair_homology, group_betti_bounds, group_fiber_classes,
                                   group_vanishing_and_torsion, is_decreasing, lcs_relation_check)

from corpus import CORPUS_SIZE, corpus


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[criterion {number:>2}] {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else ""))
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def psl():
    return all_subgroups(catalog_group("PSL27"))


def test_criterion_01_a5(report):
    start = time.perf_counter()
    t = all_subgroups(catalog_group("A5"))
    lg = subgroup_lattice_proper(t)
    h = poset_homology(lg)
    faces = reduced_euler(order_complex(lg))
    mu = mobius_bottom_top(as_bounded_lattice(subgroup_lattice_full(t)))
    elapsed = time.perf_counter() - start
    ok = h.betti() == {1: 60} and h.is_torsion_free() and h[0].is_zero() and faces == mu == -60 and elapsed < 10
    report(1, "L(A5) is a wedge of 60 circles", ok, f"{h.report()}; euler {faces}, mobius {mu}; {elapsed:.1f}s")


def test_criterion_02_psl27_lattice(report):
    start = time.perf_counter()
    t = all_subgroups(catalog_group("PSL27"))
    lg = subgroup_lattice_proper(t)
    h = poset_homology(lg)
    euler = reduced_euler(order_complex(lg))
    elapsed = time.perf_counter() - start
    ok = h.betti() == {1: 48, 2: 48} and h.is_torsion_free() and euler == 0 and elapsed < 300
    report(2, "L(PSL(2,7)) has homology (0, Z^48, Z^48)", ok, f"euler {euler}; {elapsed:.1f}s")


def test_criterion_03_pipeline(report, psl):
    rep = psl27_pipeline(psl)
    steps = rep.steps
    dropped = steps[1].notes["dropped_classes"]
    ok = (rep.ok and all(s.ok for s in steps)
          and sorted(dropped) == ["A4a", "A4b", "Z4", "Z7"]
          and steps[2].notes["isolated"] == {"1": {"rank": 48, "torsion": []}}
          and steps[3].notes["isolated"] == {"2": {"rank": 48, "torsion": []}}
          and steps[-1].homology.is_zero() and steps[-1].notes["complement_of_kept"] == 0)
    report(3, "PSL(2,7) reduction ledger", ok, f"dropped {dropped}; removed class {rep.choice}")


def test_criterion_04_coset_bounds(report, psl):
    start = time.perf_counter()
    cache = {}
    facts = {0: 0, 1: 0}  # connected and simply connected, supplied as known facts
    b2 = group_betti_bounds(psl, "C", 2, facts=facts, fiber_cache=cache)
    b3 = group_betti_bounds(psl, "C", 3, facts=facts, fiber_cache=cache)
    concl = group_vanishing_and_torsion(psl, "C", 3, cache)["concludes"]
    elapsed = time.perf_counter() - start
    ok = b2 == 14616 and b3 == 11760 and "H[4] = 0" in concl and "H[3] torsion-free" in concl and elapsed < 120
    report(4, "C(PSL(2,7)) Betti bounds", ok, f"m=2: {b2}, m=3: {b3}; {'; '.join(concl)}; {elapsed:.1f}s")


def test_criterion_05_filtration_quotients(report):
    start = time.perf_counter()
    posets = list(corpus()) + [subgroup_lattice_proper(all_subgroups(catalog_group(n))) for n in sorted(CATALOG)]
    bad = []
    pairs = 0
    for i, p in enumerate(posets):
        f = fiber_homologies(p)
        for k in range(p.dim + 1):
            pairs += 1
            if filtration_pair_homology(p, k) != filtration_pair_formula(p, k, f):
                bad.append((i, k))
    elapsed = time.perf_counter() - start
    ok = not bad and len(corpus()) >= 200 and CORPUS_SIZE >= 200 and elapsed < 300
    report(5, "filtration quotients are wedges of suspended fibers", ok,
           f"{len(posets)} posets, {pairs} pairs, mismatches {bad[:5]}; {elapsed:.1f}s")


def test_criterion_06_sandwich(report):
    bad = []
    for i, p in enumerate(corpus()):
        f = fiber_homologies(p)
        h = poset_homology(p, reduced=False)
        for m in range(p.dim + 3):
            if not betti_lower(p, m, f) <= h.rank(m) <= betti_upper(p, m, f):
                bad.append((i, m))
    report(6, "lower <= Betti number <= upper on the corpus", not bad, f"violations {bad[:5]}")


def test_criterion_07_solvable(report):
    detail = {}
    ok = True
    for name in SOLVABLE:
        h = poset_homology(subgroup_lattice_proper(all_subgroups(catalog_group(name))))
        dims = [m for m in h.dims() if not h[m].is_zero()]
        detail[name] = dims
        # an empty wedge of spheres (contractible) counts as concentrated
        ok &= h.is_torsion_free() and len(dims) <= 1
    report(7, "solvable L(G) torsion-free in one dimension", ok, str(detail))


def test_criterion_08_decreasing(report):
    base = (is_decreasing(Poset.from_pairs("a", [])).is_decreasing
            and not is_decreasing(Poset.empty()).is_decreasing
            and not is_decreasing(Poset.from_pairs("ab", [])).is_decreasing)
    bad = [i for i, p in enumerate(corpus()) if not is_decreasing(p).hdim_bound_ok]
    report(8, "decreasing base cases and Hdim <= dim - s", base and not bad, f"base {base}; violations {bad[:5]}")


def test_criterion_09_lcs(report):
    start = time.perf_counter()
    results = {n: lcs_relation_check(all_subgroups(catalog_group(n))) for n in ("S3", "Z6")}
    elapsed = time.perf_counter() - start
    ok = all(r["relative_matches"] and r["corollary"]["holds"] and r["ok"] for r in results.values()) and elapsed < 30
    detail = "; ".join(f"{n}: relative {r['relative'].betti()}, {r['corollary']['lhs']} <= {r['corollary']['rhs']}"
                       for n, r in results.items())
    report(9, "(C G, S G) relative homology vs L G", ok, f"{detail}; {elapsed:.1f}s")


def test_criterion_10_full_coset_homology(report, psl):
    # heavy: about half a minute for 6745 elements and 591521 chains
    start = time.perf_counter()
    cp = coset_poset(psl).poset
    h = poset_homology(cp)
    elapsed = time.perf_counter() - start
    classes = group_fiber_classes(psl, "C")
    ok = (h[0].is_zero() and h[1].is_zero() and h.rank(2) <= 14616 and h.rank(3) <= 11760
          and not h[3].torsion and h[4].is_zero() and hdim(h) <= 3 and len(classes) > 0)
    report(10, "full homology of C(PSL(2,7))", ok, f"{h.report().replace(chr(10), ', ')}; {elapsed:.1f}s")
