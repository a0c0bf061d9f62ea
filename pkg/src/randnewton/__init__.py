"""Randomized-subset Newton solver for neural collocation of differential equations."""

from .autodiff import (
    ACTIVATIONS,
    evaluate_fields,
    evaluate_values,
    laplacian,
    spatial_gradient,
)
from .continuation import (
    NoShock,
    RandomRestart,
    TrackReport,
    TrackSchedule,
    WarmStart,
    shock_location,
    track,
)
from .linalg import SingularMatrix, condition_number, solve_least_squares, solve_square
from .metrics import ConvergenceEstimate, InsufficientTail, aggregate_table, estimate_order
from .network import (
    Explicit,
    FrequencyScaled,
    FunctionFit,
    NetworkParams,
    NetworkStack,
    RandomNormal,
    initialize,
    load_checkpoint,
    param_count,
    save_checkpoint,
)
from .problems import (
    NoReference,
    catalog,
    collocation_failure_demo,
    get,
    gray_scott_guess,
    lambda_star,
    pattern_distance,
    reference_error,
    shooting_roots,
)
from .residual import (
    Ball,
    Box,
    Dirichlet,
    Neumann,
    ProblemSpec,
    RandomBall,
    RandomUniform,
    ResidualSystem,
    SamplePlan,
    Underdetermined,
    UniformGrid,
    build_plan,
)
from .solver import (
    AffineSystem,
    SolveReport,
    SolverConfig,
    StructurallySingular,
    TooLarge,
    covariance_diagnostic,
    expectation_diagnostic,
    solve,
)

__version__ = "0.1.0"
