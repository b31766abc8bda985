"""Sequential weak-measurement Ramsey simulation and Bayesian frequency estimation."""

from .core import (
    MODE_WEAK_ONLY,
    MODE_WEAK_WITH_STRONG,
    MODES,
    AveragedDynamics,
    KrausPair,
    PlanarState,
    ProtocolParams,
    averaged_dynamics,
    dephasing_rate,
    kraus_pair,
    planar_state_update,
    weak_meas_probabilities,
    wrap_angle,
)
from .baselines import (
    CascadedBmseResult,
    CascadedFisher,
    CascadedPlan,
    SymmetricCSS,
    cascaded_bmse,
    cascaded_fisher,
    cascaded_plan,
    oci_bound,
    symmetric_css,
)
from .collective_light import (
    CollectiveMoments,
    initial_css_moments,
    light_sensitivity,
    propagate_collective_moments,
)
from .errors import (
    ConfigError,
    DegenerateFrequencyError,
    NumericError,
    SizeGuardError,
    WeakclockError,
)
from .estimation import (
    BmseResult,
    FrequencyEstimate,
    Prior,
    ThresholdModel,
    bayesian_mmse_estimate,
    bmse_experiment,
    dft_objective,
    mle_estimate,
    select_estimator,
    threshold_model,
)
from .information import InformationEstimate, analytic_information, cfi_monte_carlo
from .trajectories import (
    Trajectory,
    enumerate_outcome_distribution,
    sample_outcomes,
    sample_scores,
    score_trajectory,
    simulate_trajectory,
)

__version__ = "0.1.0"
