"""Statistics of elliptic-curve groups over prime fields.

Three independent routes to the average number of (cyclic) subgroups of
E(F_p): exhaustive enumeration of all short-Weierstrass models, truncated
products of exact local matrix densities, and the analytic main term with
exact Euler factors - plus a laboratory for divisor sums in arithmetic
progressions and short intervals.
"""

from .arith import (
    divisors,
    factorize,
    kronecker_chi,
    multiplicative_suite,
    primes_up_to,
    ramanujan_sum,
)
from .curves import (
    StructureTally,
    empirical_probability,
    group_shape,
    point_count,
    tally_structures,
    weighted_average,
)
from .densities import f_ell, f_ell_closed, f_infty, f_p_local, g_density, g_sum, probability_product
from .divisor_ap import delta_window, dirichlet_main, mean_square_experiment, tau_sum_window
from .errors import BudgetError, DomainError, InvariantError
from .groups import GroupShape, cyclic_subgroup_count, stat_on_shape, subgroup_count, subgroup_oracle
from .analytic import bound_envelopes, cyclicity_probability, estimate_average_slope, local_factor, main_term

__all__ = [
    "BudgetError",
    "DomainError",
    "GroupShape",
    "InvariantError",
    "StructureTally",
    "bound_envelopes",
    "cyclic_subgroup_count",
    "cyclicity_probability",
    "delta_window",
    "dirichlet_main",
    "divisors",
    "empirical_probability",
    "estimate_average_slope",
    "f_ell",
    "f_ell_closed",
    "f_infty",
    "f_p_local",
    "factorize",
    "g_density",
    "g_sum",
    "group_shape",
    "kronecker_chi",
    "local_factor",
    "main_term",
    "mean_square_experiment",
    "multiplicative_suite",
    "point_count",
    "primes_up_to",
    "probability_product",
    "ramanujan_sum",
    "stat_on_shape",
    "subgroup_count",
    "subgroup_oracle",
    "tally_structures",
    "tau_sum_window",
    "weighted_average",
]

__version__ = "0.1.0"
