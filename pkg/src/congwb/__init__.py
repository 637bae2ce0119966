"""Finite diagram and matrix monoid instances, their congruence lattices by
brute force, the named congruence constructions, and catalogue verification.
"""
from .congruences import (Congruence, CongruenceSet, PrincipalCache,
                          all_congruences, congruence_generated, diagonal,
                          extend_by_diagonal, full_hom, is_congruence,
                          is_liftable, join, largest_congruence_below,
                          liftable_congruences, max_h_congruence, meet,
                          principal_congruence, refines, restrict_congruence)
from .constructions import (INPair, NZTuple, PartialEquivalence, Retraction,
                            RetractionAmbiguity, as_partial_on_parent,
                            assemble, build_retraction, enumerate_nz_tuples,
                            green_family, hom_equivalence, make_in_pair,
                            minimal_ideal, n_down, nu, nu_direct, nu_sharp,
                            phi, phi_in, r_in, rees, retractable_pair, tau_n,
                            theta_family, theta_tuple, zeta_subgroups)
from .core import (GreenData, IdealChain, PartialSemigroup, build_category,
                   build_partial_semigroup, green_relations, ideal_chain,
                   is_h_trivial_class, is_regular, is_regular_class,
                   is_stable, is_stable_class, restrict_to_ideal)
from .elements import FamilySpec, canonical_str, parse_objects
from .errors import GuardError, ValidationError
from .groups import (GroupHClass, NaturalEmbedding, NormalSubgroup,
                     describe_group, group_h_class, natural_embedding,
                     normal_subgroups, subgroup_label, units_subgroups)
from .lattices import (AbstractLattice, PropertyReport, chain_lattice,
                       check_properties, congruence_lattice, direct_product,
                       eq_lattice, find_isomorphism, is_chain, is_isomorphic,
                       normal_subgroup_lattice, stack_lattices)
from .predictions import (Catalogue, TheoremReport, brute_h_congruences,
                          check_coordinate_order, predict_h_congruences,
                          predict_prb, predict_small, predict_theorem,
                          verify_theorem)

__version__ = "0.1.0"
