"""Measurement-induced coherence of Gaussian continuous-variable states.

Conditional states under general-dyne measurements, Fock-basis and Gaussian
relative-entropy coherence, normal-form state families and continuously
monitored open dynamics.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DimensionError,
    GaussianError,
    InstabilityError,
    LimitError,
    PhysicalityError,
    StepSizeError,
    TruncationError,
    UnsupportedError,
)
from .core import (  # noqa: E402
    GaussianState,
    SymplecticSpectrum,
    direct_sum,
    h,
    is_physical,
    is_separable_ppt,
    mean_photon_number,
    partial_trace,
    partial_transpose,
    quantum_mutual_information,
    single_mode_state,
    symplectic_eigenvalues,
    symplectic_form,
    thermal_state,
    vacuum,
    von_neumann_entropy,
    williamson,
)
from .measurement import (  # noqa: E402
    GeneralDyneMeasurement,
    MeasurementOutcome,
    condition_on_outcome,
    conditional_first_moment_energy,
    measurement_cm,
    outcome_density,
    outcome_distribution,
    sample_outcome,
    sample_outcomes,
)
from .fock import (  # noqa: E402
    JointPhotonNumberDistribution,
    PhotonNumberDistribution,
    density_matrix,
    fock_amplitudes,
    fock_oracle_density_matrix,
    joint_photon_number_distribution,
    photon_number_distribution,
    shannon_entropy,
)
from .coherence import (  # noqa: E402
    CoherenceReport,
    average_remote_coherence,
    coherence,
    coherence_report,
    correlated_coherence,
    entropic_coherence,
    gaussian_coherence,
    optimal_homodyne_coherence,
    pure_state_discord,
    remote_coherence,
)
from .states import (  # noqa: E402
    InterlinkedParams,
    NormalFormParams,
    StateClass,
    interlinked_fock_amplitudes,
    interlinked_three_mode,
    is_entangled,
    max_c1_on_physicality,
    normal_form_state,
    sample_normal_form,
    sts_from_physical_params,
    thresholds,
)
from .monitoring import (  # noqa: E402
    MonitoredModel,
    OPOParams,
    conditional_matrices,
    drift_diffusion,
    lyapunov_steady_state,
    opo_model,
    opo_steady_state_closed_form,
    riccati_steady_state,
    simulate_trajectory,
    threshold_squeezing,
)
