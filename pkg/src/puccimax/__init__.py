"""Value-function solver, game simulator and analytic oracles for the
Dirichlet problem of the maximal Pucci operator."""

__version__ = "0.1.0"

from .dpp import (
    BasisChoice,
    DPPReport,
    GameConfig,
    SearchConfig,
    ValueFunction,
    best_response,
    build_value_function,
    consistency_check,
    dpp_apply,
    interpolate,
    residual,
    solve_dpp,
    solve_dpp_degenerate,
    value_envelope,
)
from .errors import (
    ConfigError,
    DegenerateBranchMismatch,
    GridTooCoarse,
    MaxStepsExceeded,
    MismatchedStart,
    MismatchedSweep,
    NonPositiveRunningPayoff,
    NonSymmetric,
    NotConverged,
    OutOfLattice,
    OutOfRange,
    PucciMaxError,
    UnsupportedDimension,
)
from .fields import constant_field, pointwise_field, quadratic_form_field
from .game import (
    CustomStrategy,
    FixedBasis,
    GreedyFromValue,
    McEstimate,
    Transcript,
    estimate_value,
    exit_time_bound_check,
    martingale_diagnostic,
    play,
    play_transcripts,
    step,
)
from .geometry import Annulus, Ball, Box, Implicit, Region, classify, contains, strip_width
from .oracles import (
    QuadraticCase,
    RadialSolution,
    make_quadratic_case,
    radial_barrier_margins,
    radial_coefficients,
    radial_eval,
    radial_ode_residual,
    radial_pucci_consistency,
)
from .pucci import (
    PucciParams,
    eigenvalues_sym,
    jacobi_eigensystem,
    pucci_plus,
    pucci_plus_degenerate,
    sup_over_bases_bruteforce,
    symmetrize,
)
