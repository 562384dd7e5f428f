"""Mean-square-error bounds for phase estimation under photon-number constraints."""

__version__ = "0.1.0"

from .states import (
    PhotonMetrics,
    StateVector,
    build_coherent_noon,
    build_gaussian,
    build_noon,
    build_sine,
    from_continuum,
    metrics,
    vacuum,
)
from .mse import (
    ToeplitzKernel,
    covariant_mse,
    kernel,
    kernel_entry,
    outcome_density,
    quadrature_mse_oracle,
)
from .optimize import (
    Constraint,
    GridMinimaxInstance,
    OptimizationError,
    OptimizationResult,
    grid_minimax_risk,
    min_phase_mse,
    noon_divergence_sweep,
    noon_local_minimax_lower,
    optimize_avg_constraint,
    optimize_max_constraint,
    worst_case,
)
from .fisher import FisherResult, lub_bound, sld_fisher
from .continuum import (
    ContinuumFunction,
    dirichlet_ground_state,
    p2_expectation,
    q2_expectation,
    scaling_convergence,
    uncertainty_check,
)
from .simulate import (
    SampleBatch,
    empirical_mse,
    noon_plateau_demo,
    sample_outcomes,
    two_step_demo,
    wrapped_error,
)
