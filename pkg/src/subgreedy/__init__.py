"""Random-order greedy for monotone submodular maximization over simple
partition matroids, with exact and Monte-Carlo evaluation tools."""

__version__ = "0.1.0"

from .errors import SubgreedyError
from .exact import (
    bound_fixed_point,
    bound_grid_search,
    brute_force_opt,
    exact_expected_values,
    g,
    g_curve,
    monte_carlo_expected_values,
)
from .greedy import TieBreak, check_potential_monotone, random_order_greedy, swm_greedy
from .ground import PartitionMatroid, is_base, is_independent, make_partition
from .instances import (
    Instance,
    SwmInstance,
    build_instance_7_12,
    build_instance_19_33,
    compose_copies,
    extend_with_dummies,
    random_coverage_instance,
    read_instance,
    reduce_swm,
    write_instance,
)
from .oracle import Modular, WeightedCoverage, verify_properties, wrap_counting
