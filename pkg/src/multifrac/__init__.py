"""Multiscale measures, fractional derivatives and multifractional
Laplacians on uniform one-dimensional grids."""

from .errors import *  # noqa: F401,F403
from .fractional import (
    SPECTRAL,
    FracOrder,
    GrunwaldLetnikov,
    SingularQuadrature,
    Spectral,
    combo,
    dtilde,
    liouville,
    symmetric_m2,
    weyl,
)
from .grid import (
    DenseOperator,
    Domain,
    FunctionSpec,
    GridFunction,
    adjoint_defect,
    parse_function_spec,
    sample,
    to_matrix,
    weighted_inner,
)
from .laplacians import (
    bar_kinetic,
    explicit_kinetic,
    explicit_multiscale,
    implicit_kinetic,
    implicit_left,
    implicit_right,
    k_alpha,
    plateau_differential,
    q_derivative,
    q_laplacian,
    weighted_frac,
)
from .measure import (
    MeasureProfile,
    MeasureTerm,
    binomial,
    eval_q,
    eval_weight,
    eval_weight_derivative,
    local_scaling_exponent,
    trivial_profile,
)
from .operators import OperatorSpec
from .solver import PotentialSpec, SolveResult, dispersion, solve_linear, solve_nonlinear
from .verify import PropertyCheck, SuiteConfig, VerificationReport, bilinear_concomitant, leibniz_defect, run_suite

__version__ = "0.1.0"
