"""collapse-kit: collapsibility analysis for three-variable statistical models.

Given a response Y, an explanatory X, and a background W -- as either a
contingency table or an evaluable continuous model -- the package computes
distribution/density dependence functions, checks homogeneity and the
collapsibility family (plain, uniform, averaged), detects Yule-Simpson
association reversal, and carries the same program over to quantile
regression coefficients, including the least-squares slope decomposition.
"""

from .collapse import (
    ClassMembership,
    LatticeResult,
    MembershipReport,
    Verdict,
    check_a_collapsibility,
    check_collapsibility,
    check_density_a_collapsibility,
    check_homogeneity,
    check_independence,
    check_uniform_collapsibility,
    class_lattice,
    classify,
    detect_reversal,
    residual_integral,
)
from .dependence import (
    DependenceField,
    decomposition_terms,
    density_dep,
    dist_dep_continuous,
    dist_dep_discrete,
)
from .errors import (
    BracketError,
    CollapseKitError,
    DifferentiationError,
    GeneratorBudgetError,
    InputError,
    ModelConfigError,
    NonDifferentiablePointError,
    NotACdfError,
    NullEventError,
    NumericalError,
    QuadratureError,
    QuantileUndefinedError,
    TableError,
    ZeroMassError,
)
from .models import (
    ContinuousModel,
    EvalGrid,
    auto_grid,
    ci_yw,
    grid_model,
    indep_xw,
    linear_interaction,
    marginal_cdf_y_given_x,
    marginal_pdf_y_given_x,
    model_from_config,
    posterior_w_density,
    uniform_quadratic,
    uniform_shift,
)
from .numerics import (
    DiffSpec,
    QuadratureSpec,
    central_diff,
    integrate,
    invert_cdf,
)
from .quantile import (
    CochranDecomposition,
    QuantileProfile,
    build_quantile_profile,
    check_a_collapsibility_quantile,
    check_total_effect_transfer,
    cochran_decompose,
    cochran_from_samples,
    cox_residual,
    criterion_integral,
    pointwise_product_field,
    quantile_coeff,
    quantile_coeff_w,
    quantile_coeff_x_of_w,
    quantile_function,
    quantile_slope_identity,
    total_effect,
)
from .suites import SuiteResult, run_suite
from .tables import DiscreteJoint, build_discrete_joint, conditional_prob, joint_from_csv

__version__ = "0.1.0"
