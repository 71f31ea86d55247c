"""Exact integer homology of posets from finite groups, with reductions and spectral bounds."""

__version__ = "0.1.0"

from .poset import (BoundedLattice, CycleError, DuplicateLabel, ImproperElement, LevelDecomposition, NotALattice,
                    Poset, PosetError, UnknownElement, as_bounded_lattice, complements, level_decomposition,
                    parse_poset, format_poset)
from .simplicial import (ChainComplex, SimplicialComplex, chain_complex, cone, join, order_complex,
                         relative_chain_complex, suspension, wedge)
from .homology import (HomologyGroup, HomologyProfile, hdim, homology, mobius_bottom_top, pair_homology,
                       poset_homology, reduced_euler, relative_homology, smith_normal_form)
from .groups import (OrderCapExceeded, PermGroup, SubgroupTable, all_subgroups, catalog_group, coset_poset,
                     group_from_generators, subgroup_lattice_proper)
from .reduce import coatom_meet_reduction, psl27_pipeline, remove_antichain, verify_wedge_homology
from .spectral import (E1Page, betti_lower, betti_upper, decreasing_sufficiency, e1_page, group_betti_bounds,
                       is_decreasing, lcs_relation_check, vanishing_and_torsion)
