"""Workbench for multiplication-table counts and divisor-chain geometry."""

from .arith import (
    Factorization,
    PrimeSieve,
    build_sieve,
    divisors,
    factorize,
    is_squarefree,
    omega,
    omega_above,
    prime_reciprocal_sum,
    tau_m,
)
from .asymptotics import (
    AsymptoticProfile,
    PrimeLadder,
    build_prime_ladder,
    clustering_factor,
    dominant_index,
    failure_interval,
    failure_interval_possible,
    ladder_ratio,
    log_gaps,
    mean_slope,
    nearest_order_index,
    order_exponent,
    predicted_density,
    profile,
    q_rate,
    solve_exponent,
    two_sided_condition,
    two_sided_threshold,
)
from .counting import (
    TableSpec,
    count_localized,
    count_localized_squarefree,
    count_products,
    default_caps,
    local_global_ratio,
    squarefree_window,
    volume_harmonic_sum,
    window_tuples,
)
from .errors import BudgetExceeded, EnumerationOverflow, UnsupportedDimension
from .geometry import (
    Box,
    BoxUnion,
    LogCoordinate,
    SquarefreeTuple,
    admissible_split_sequences,
    box_union_volume,
    build_chain_boxes,
    chain_count,
    chain_count_window,
    chain_pair_moment,
    chain_volume,
    chain_volume_bound,
    divisor_chains,
    divisor_split_bound,
    split_volume_bound,
    squarefree_tuple,
)
from .orderstats import (
    StaircaseSpec,
    composition_sum,
    staircase_closed_form,
    staircase_volume,
    staircase_volume_mc,
)
from .poisson import (
    PoissonSpec,
    SlabResult,
    slab_bound_shape,
    slab_partition,
    slab_prob,
    solve_tilt,
    upper_tail_bound,
    upper_tail_weighted,
)

__all__ = [name for name in dir() if not name.startswith("_")]
