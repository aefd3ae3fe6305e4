"""Comass norms of p-covectors and the Euclidean-to-comass ratio constants."""

__version__ = "0.1.0"

from .bounds import BoundCell, BoundTable, SearchConfig, build_table, exact_registry, k_rule, lower_bound_search, pascal_rule
from .comass import (
    ComassEstimate,
    ComassEstimator,
    NoClosedFormError,
    OptimizerConfig,
    comass,
    comass_estimate,
    comass_exact,
    frame_gradient,
    ratio_estimate,
)
from .exterior import (
    Covector,
    FormatError,
    Frame,
    euclidean_norm,
    evaluate_on_frame,
    hodge_star,
    random_covector,
    random_frame,
    wedge,
)
from .forms import SpecialLagParams, cayley_form, dadok_harvey_check, special_lagrangian_form, symplectic_power_form
from .systolic import SystolicQuery, cpm_equality_check, gamma_bound, systolic_constant
from .wedge_bounds import WedgeBoundReport, check_complementary, check_general, check_m_fold

__all__ = [
    "BoundCell",
    "BoundTable",
    "ComassEstimate",
    "ComassEstimator",
    "Covector",
    "FormatError",
    "Frame",
    "NoClosedFormError",
    "OptimizerConfig",
    "SearchConfig",
    "SpecialLagParams",
    "SystolicQuery",
    "WedgeBoundReport",
    "build_table",
    "cayley_form",
    "check_complementary",
    "check_general",
    "check_m_fold",
    "comass",
    "comass_estimate",
    "comass_exact",
    "cpm_equality_check",
    "dadok_harvey_check",
    "euclidean_norm",
    "evaluate_on_frame",
    "exact_registry",
    "frame_gradient",
    "gamma_bound",
    "hodge_star",
    "k_rule",
    "lower_bound_search",
    "pascal_rule",
    "random_covector",
    "random_frame",
    "ratio_estimate",
    "special_lagrangian_form",
    "symplectic_power_form",
    "systolic_constant",
    "wedge",
]
