"""Discretizable molecular distance geometry: branch-and-prune solving,
reflection-symmetry solution counting, width prediction, and hard-instance
generation via the subset-sum encoding."""

from .geometry import (AffineHull, DEFAULT_TOL, DegenerateCenters,
                       GeometryError, MAX_DIMENSION, NegativeCayleyMenger,
                       SphereSystem, ToleranceConfig, cayley_menger_volume,
                       intersect_k_spheres, reflect_through_hull,
                       signed_simplex_orientation, simplex_volume)
from .instance import (DgpInstance, EdgePartition, InstanceError,
                       SubsetSumInstance, ValidationReport,
                       generate_random_yes, parse_pruning_spec,
                       partition_edges, read_instance, reduce_subset_sum,
                       validate, write_instance)
from .oracle import (brute_force_embeddings, reduction_count_oracle,
                     subset_sum_solutions)
from .solver import (InvalidInstanceError, SearchStats, Solution,
                     SolutionLimitExceeded, SolveResult, VerificationReport,
                     read_solutions, solve, verify_embedding, write_solutions)
from .symmetry import (DegenerateChirality, PrefixDistanceSet,
                       apply_group_element, apply_partial_reflection,
                       chirality, embeddings_close, orbit,
                       predicted_solution_count, prefix_distance_set,
                       pruning_group_generators, suffix_flip_signs)
from .width import (CaseClassification, CrosscheckReport, WidthProfile,
                    classify, crosscheck, predict_profile)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
