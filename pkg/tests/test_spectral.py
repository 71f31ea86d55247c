from itertools import combinations

import pytest

from grouplattice.groups import SOLVABLE, all_subgroups, catalog_group, coset_poset, subgroup_lattice_proper
from grouplattice.homology import HomologyGroup, hdim, poset_homology
from grouplattice.poset import Poset
from grouplattice.spectral import (bound_table, betti_lower, betti_upper, decreasing_sufficiency, diagonal_totals,
                                   e1_page, e1_two_step, fiber_homologies, group_betti_bounds, group_e1_page,
                                   group_fiber_classes, group_vanishing_and_torsion, is_decreasing,
                                   lcs_relation_check, poset_fiber_classes, refined_bounds, vanishing_and_torsion)

from corpus import corpus


def proper_b3():
    subsets = [frozenset(s) for k in (1, 2) for s in combinations((1, 2, 3), k)]
    return Poset.from_relation(subsets, lambda a, b: a < b)


def antichain(k):
    return Poset.from_pairs(range(k), [])


def bipartite(lower, upper, tag=""):
    bottoms = [f"{tag}b{i}" for i in range(lower)]
    tops = [f"{tag}t{j}" for j in range(upper)]
    return bottoms, tops, [(b, t) for b in bottoms for t in tops]


@pytest.fixture(scope="module")
def psl():
    return all_subgroups(catalog_group("PSL27"))


def test_e1_antichain():
    e = e1_page(antichain(5))
    assert e.cells == {(0, 0): HomologyGroup(5)}


def test_e1_boolean_proper_part():
    e = e1_page(proper_b3())
    # oracle: three atoms with empty fibers; three coatoms over two points each
    assert e.cells == {(0, 0): HomologyGroup(3), (1, 0): HomologyGroup(3)}
    assert e.n == 1


def test_two_level_shape():
    # base: bipartite K(2,7), a wedge of 6 circles; two tops each over a K(2,4), a wedge of 3 circles
    bottoms, tops, pairs = bipartite(2, 7)
    extra = [("h0", x) for x in bottoms + tops[:4]] + [("h1", x) for x in bottoms + tops[3:]]
    p = Poset.from_pairs(bottoms + tops + ["h0", "h1"], pairs + [(b, a) for a, b in extra])
    e = e1_two_step(p, bottoms + tops)
    assert e[(0, 1)] == HomologyGroup(6)
    assert e[(1, 1)] == HomologyGroup(6)
    assert e[(0, 0)] == HomologyGroup(1)
    assert set(e.cells) == {(0, 0), (0, 1), (1, 1)}
    h = poset_homology(p)
    # the only differential runs between the two Z^6 cells
    assert hdim(h) <= 2 and h.rank(2) == h.rank(1) <= 6


def test_e1_column_zero_is_concentrated():
    for p in corpus():
        e = e1_page(p)
        assert all(l == 0 for k, l in e.cells if k == 0)
        assert all(k <= e.n for k, _ in e.cells)


def test_e1_euler_and_diagonals_on_corpus():
    for p in corpus():
        f = fiber_homologies(p)
        e = e1_page(p, f)
        h = poset_homology(p, reduced=False)
        assert e.euler() == h.euler()
        for m in range(p.dim + 2):
            assert e.diagonal_rank(m) >= h.rank(m)


def test_betti_upper_and_lower_small():
    b3 = proper_b3()
    assert betti_upper(b3, 1) == 3
    assert poset_homology(b3).rank(1) == 1
    assert betti_upper(b3, 5) == 0
    assert betti_lower(b3, 0) == 0
    assert betti_lower(b3, 7) <= 0


def test_lower_bound_tight_on_disjoint_chains():
    # every fiber is empty or contractible: bounds collapse to the component count
    chains = Poset.from_pairs(range(9), [(0, 1), (1, 2), (3, 4), (6, 7)])
    assert betti_lower(chains, 0) == betti_upper(chains, 0) == poset_homology(chains, reduced=False).rank(0) == 5
    assert betti_lower(antichain(4), 0) == 4


def test_bound_sandwich_and_refinement_on_corpus():
    for p in corpus():
        f = fiber_homologies(p)
        h = poset_homology(p, reduced=False)
        classes = poset_fiber_classes(p, f)
        totals = diagonal_totals(classes)
        refined = refined_bounds(totals, {0: h.rank(0)} if len(p) else {})
        for m in range(p.dim + 3):
            assert betti_lower(p, m, f) <= h.rank(m) <= betti_upper(p, m, f)
            lo, hi = refined.get(m, (0, 0))
            assert lo <= h.rank(m) <= hi


def test_vanishing_antichain():
    rep = vanishing_and_torsion(antichain(3), 0)
    assert rep["vanishes_above"] and "H[1] = 0" in rep["concludes"]


def test_vanishing_s4():
    t = all_subgroups(catalog_group("S4"))
    lg = subgroup_lattice_proper(t)
    f = fiber_homologies(lg)
    top = max(hdim(h) for h in f.values())
    rep = vanishing_and_torsion(lg, top + 1, f)
    assert rep["vanishes_above"]
    assert rep["hdim_bound"] == top + 1
    assert hdim(poset_homology(lg)) <= top + 1


def test_vanishing_never_contradicts_homology():
    for p in corpus():
        f = fiber_homologies(p)
        h = poset_homology(p, reduced=False)
        for m in range(p.dim + 2):
            rep = vanishing_and_torsion(p, m, f)
            if rep["vanishes_above"]:
                assert h[m + 1].is_zero()
            if rep["torsion_free"]:
                assert not h[m].torsion
        assert hdim(poset_homology(p)) <= vanishing_and_torsion(p, 0, f)["hdim_bound"]


def test_coset_poset_psl27_bounds(psl):
    cache = {}
    assert group_betti_bounds(psl, "C", 2, fiber_cache=cache) == 21383
    assert group_betti_bounds(psl, "C", 3, fiber_cache=cache) == 11760
    assert group_betti_bounds(psl, "C", 2, facts={0: 0, 1: 0}, fiber_cache=cache) == 14616
    assert group_betti_bounds(psl, "C", 3, facts={0: 0, 1: 0}, fiber_cache=cache) == 11760
    bt = bound_table(group_fiber_classes(psl, "C", cache), {0: 0, 1: 0})
    assert bt.refined[2] == (2856, 14616)
    rep = group_vanishing_and_torsion(psl, "C", 3, cache)
    assert "H[4] = 0" in rep["concludes"] and "H[3] torsion-free" in rep["concludes"]


def test_coset_fiber_table_psl27(psl):
    classes = {fc.label: fc for fc in group_fiber_classes(psl, "C")}
    expected = {"Z2": {0: 1}, "Z3": {0: 2}, "Z4": {0: 1}, "Z7": {0: 6}, "V4a": {1: 3}, "S3": {1: 8},
                "D8": {1: 3}, "A4a": {1: 30}, "F21": {1: 96}, "S4a": {2: 120}}
    for label, betti in expected.items():
        assert classes[label].homology.betti() == betti
    assert classes["1"].count == 168 and classes["1"].homology[-1] == HomologyGroup(1)


def test_lattice_zp_bounds():
    t = all_subgroups(catalog_group("Z7"))
    for m in range(1, 4):
        assert group_betti_bounds(t, "L", m) == 0


@pytest.mark.parametrize("name", ["S3", "Z6", "D8", "A4", "S4"])
@pytest.mark.parametrize("which", ["L", "C", "S"])
def test_group_bounds_dominate(name, which):
    t = all_subgroups(catalog_group(name))
    if which == "L":
        p = subgroup_lattice_proper(t)
    else:
        p = coset_poset(t, punctured=which == "S").poset
    h = poset_homology(p, reduced=False)
    for m in range(p.dim + 2):
        assert h.rank(m) <= group_betti_bounds(t, which, m)


def test_group_e1_matches_poset_e1():
    t = all_subgroups(catalog_group("S4"))
    lg = subgroup_lattice_proper(t)
    assert group_e1_page(t, "L").cells == e1_page(lg).cells
    cg = coset_poset(t).poset
    assert group_e1_page(t, "C").cells == e1_page(cg).cells


def test_decreasing_base_cases():
    assert is_decreasing(Poset.from_pairs("a", [])).is_decreasing
    assert not is_decreasing(antichain(2)).is_decreasing
    assert not is_decreasing(Poset.empty()).is_decreasing
    assert is_decreasing(Poset.from_pairs("abc", [("a", "b"), ("b", "c")])).is_decreasing


def test_decreasing_corpus_bounds():
    for p in corpus():
        v = is_decreasing(p)
        assert v.hdim_bound_ok and v.lemma_ok
        if v.is_decreasing:
            assert v.hdim <= v.dim - v.s - 1


def test_decreasing_sufficiency_certified():
    pairs = [("a", "x"), ("a2", "x2"), ("b", "y"), ("c", "y")] + [(z, "h") for z in ("a", "x", "a2", "x2")]
    p = Poset.from_pairs(["a", "a2", "b", "c", "x", "x2", "y", "h"], pairs)
    rep = decreasing_sufficiency(p, 2)
    assert rep["certified"] and not rep["level_decreasing"] and rep["s_k"] == 0
    assert is_decreasing(p).is_decreasing


def test_decreasing_sufficiency_not_certified():
    bottoms, tops, pairs = bipartite(2, 2)
    p = Poset.from_pairs(bottoms + tops, pairs)
    assert not decreasing_sufficiency(p, 1)["certified"]
    assert decreasing_sufficiency(p, 5) == {"level": 5, "certified": False, "reason": "no such level"}


def test_decreasing_sufficiency_sound_on_corpus():
    for p in corpus()[:100]:
        for k in range(p.dim + 1):
            if decreasing_sufficiency(p, k)["certified"]:
                assert is_decreasing(p).is_decreasing


def test_lcs_s3():
    r = lcs_relation_check(all_subgroups(catalog_group("S3")))
    assert r["relative"].betti() == {1: 18} and r["relative_matches"]
    assert r["C"].betti() == {1: 8}
    # the top-dimension inequality with n = dim L(S3) = 0
    assert r["corollary"]["n"] == 0 and r["corollary"]["lhs"] == 8 and r["corollary"]["rhs"] == 18
    # the same inequality one dimension higher holds trivially
    assert r["C"].rank(2) <= 6 * r["L"].rank(1) == 0
    assert r["ok"]


def test_lcs_z6():
    r = lcs_relation_check(all_subgroups(catalog_group("Z6")))
    assert r["relative"].betti() == {1: 6} and r["ok"]


@pytest.mark.parametrize("name", ["D8", "Q8", "A4", "Z2^3", "Z12"])
def test_lcs_other_groups(name):
    assert lcs_relation_check(all_subgroups(catalog_group(name)))["ok"]


@pytest.mark.parametrize("name", SOLVABLE)
def test_solvable_coset_fibers_torsion_free(name):
    t = all_subgroups(catalog_group(name))
    for fc in group_fiber_classes(t, "C"):
        assert fc.homology.is_torsion_free()
