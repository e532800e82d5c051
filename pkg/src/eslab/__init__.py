"""eslab: exponential sums of arithmetic functions over short intervals.

Library surface: windowed sieving (``sieve``), exact fixed-point polynomial
phases (``phase``), weighted exponential sums and the Heath-Brown
decomposition (``expsums``), Diophantine recovery (``diophantine``), the
circle-method pipeline (``circle``), and Vinogradov mean values
(``vinogradov``).  The ``eslab`` console script drives batch experiments.
"""

from .errors import BudgetError, ConfigError, PartialResultError, StructureError
from .phase import (
    Angle,
    PolynomialPhase,
    e_values,
    monomial_to_shifted,
    phase_at,
    phase_stream,
    rational_part_strip,
    shift_basis,
    zero_phase,
)
from .sieve import (
    ArithmeticTable,
    Window,
    chebyshev_psi_delta,
    divisor_moment,
    load_table,
    save_table,
    sieve_window,
)
from .expsums import (
    BilinearSpec,
    ExpSumResult,
    heath_brown_decompose,
    lambda_exp_sum,
    mobius_exp_sum,
    phase_weighted_sums,
    type_i_sum,
    type_ii_sum,
    unit_exp_sum,
    weyl_sum,
)
from .diophantine import (
    Arc,
    NitModel,
    RationalApprox,
    best_rational,
    classify_arc,
    continued_fraction_convergents,
    monomial_lift,
    nit_approximation,
    simultaneous_q_search,
    type_ii_structure_search,
)
from .circle import (
    WaringInstance,
    admissibility_exponent,
    admissibility_modulus,
    admissible_batch,
    archimedean_profile,
    find_representations,
    gauss_sum,
    local_density,
    major_arc_main_term,
    prime_generating_sum,
    rho_exact,
    singular_integral,
    singular_series,
)
from .vinogradov import (
    VinogradovCount,
    count_vinogradov_solutions,
    daemen_ratio,
    scaling_exponent,
    weyl_mean_value,
)

__version__ = "0.1.0"
