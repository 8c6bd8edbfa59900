"""Two harmonic oscillators in a common thermal bath: covariance dynamics,
steady states, entanglement and mixedness of the two-mode Gaussian state."""
from ._backend import BACKEND
from .dynamics import (
    EvolutionSpec,
    integrate_ode,
    propagate,
    separability_transitions,
    steady_state,
)
from .linalg import expm, expm_drift_closed, solve_lyapunov
from .measures import (
    AsymptoticClass,
    EntanglementReport,
    MixednessReport,
    SymplecticSpectrum,
    asymptotic_log_negativity,
    classify_asymptotic,
    entropy_f,
    full_report,
    log_negativity,
    mutual_information,
    seralian_bounds,
    simon_function,
    squeezing_parameter,
    symplectic_spectrum,
    von_neumann_entropy,
)
from .model import (
    CovarianceMatrix,
    DiffusionMatrix,
    PhysParams,
    drift_matrix,
    thermal_diffusion,
    thermal_product_state,
    two_mode_squeezed_vacuum,
    validate_diffusion,
    vacuum,
)

__version__ = "0.1.0"
