"""Exact ReLU+square network synthesis from local Taylor data.

Networks built here reproduce a piecewise-polynomial surrogate
f~(x) = sum_m sum_{|a|<n} c_{m,a} phi_m(x) (x - m/N)^a of a target
function bit-for-bit, with sup-norm guarantees tied to the grid
resolution N and expansion order n.
"""

from .gadgets import (
    ProductPlan,
    expected_rounds,
    fold_product,
    mult_gadget,
    product_plan,
    term_network,
    tournament_product,
)
from .indexing import (
    DEFAULT_SAFETY_CAP,
    GridIndex,
    InfeasibleError,
    MultiIndex,
    enumerate_grid,
    enumerate_multi_indices,
    grid_centers,
    grid_size,
    monomial_eval,
    multi_factorial,
    multi_index_count,
    safety_cap,
)
from .measure import (
    ErrorEstimate,
    FiniteDiffFailure,
    FiniteDiffReport,
    finite_diff_validate,
    sup_error,
)
from .netgraph import (
    ActivationKind,
    ComplexityReport,
    GraphBuilder,
    NetFormatError,
    NetGraph,
    embed_inputs,
    linear_combination,
    parallel,
)
from .oracles import FunctionOracle, builtin_oracles, polynomial_oracle
from .partition import (
    HatSpec,
    active_window,
    partition_sum_residual,
    phi_scalar,
    psi_network,
    psi_scalar,
)
from .rates import RateFit, fit_rate, rate_experiment
from .synthesis import (
    CoefficientTable,
    SubspaceSet,
    SynthesisConfig,
    SynthesisReport,
    UnionReport,
    choose_N_analytic,
    choose_N_sobolev,
    choose_N_union,
    choose_n_analytic,
    error_bound_sobolev,
    predicted_param_count,
    restrict_oracle,
    restriction_matrix,
    synthesize,
    synthesize_analytic,
    synthesize_single_subspace,
    synthesize_sobolev,
    synthesize_union,
    taylor_coefficients,
)

__version__ = "0.1.0"

__all__ = [
    "ActivationKind",
    "CoefficientTable",
    "ComplexityReport",
    "DEFAULT_SAFETY_CAP",
    "ErrorEstimate",
    "FiniteDiffFailure",
    "FiniteDiffReport",
    "FunctionOracle",
    "GraphBuilder",
    "GridIndex",
    "HatSpec",
    "InfeasibleError",
    "MultiIndex",
    "NetFormatError",
    "NetGraph",
    "ProductPlan",
    "RateFit",
    "SubspaceSet",
    "SynthesisConfig",
    "SynthesisReport",
    "UnionReport",
    "active_window",
    "builtin_oracles",
    "choose_N_analytic",
    "choose_N_sobolev",
    "choose_N_union",
    "choose_n_analytic",
    "embed_inputs",
    "enumerate_grid",
    "enumerate_multi_indices",
    "error_bound_sobolev",
    "expected_rounds",
    "finite_diff_validate",
    "fit_rate",
    "fold_product",
    "grid_centers",
    "grid_size",
    "linear_combination",
    "monomial_eval",
    "mult_gadget",
    "multi_factorial",
    "multi_index_count",
    "parallel",
    "partition_sum_residual",
    "phi_scalar",
    "polynomial_oracle",
    "predicted_param_count",
    "product_plan",
    "psi_network",
    "psi_scalar",
    "rate_experiment",
    "restrict_oracle",
    "restriction_matrix",
    "safety_cap",
    "sup_error",
    "synthesize",
    "synthesize_analytic",
    "synthesize_single_subspace",
    "synthesize_sobolev",
    "synthesize_union",
    "taylor_coefficients",
    "term_network",
    "tournament_product",
]
