"""crossdiff: a simulation laboratory for weakly coupled cross-diffusion systems.

Builds two-species cross-diffusion models as epsilon-perturbations of
decoupled drift-diffusion equations, integrates them with a
positivity-preserving staggered scheme, and measures the stability
machinery empirically: ellipticity thresholds, discrete trajectory
norms, model-difference scaling in epsilon, Picard contraction and the
a priori constants ledger.
"""

__version__ = "0.1.0"

from .analysis import (
    EllipticityReport,
    NormReport,
    OrderFit,
    det_sym_diffusion,
    difference_norm,
    epsilon_star,
    fit_order,
    mass_total,
    practical_bound,
    scan_det_sym,
    trajectory_ellipticity,
    w_norm,
)
from .certificates import (
    ConstantsInput,
    ConstantsLedger,
    LipschitzEnvelope,
    k_and_epsilon0,
    lipschitz_envelopes,
    make_ledger,
    parabolic_constants,
    stability_gammas,
)
from .discretization import FluxField, Grid, StateField, face_average, spatial_rhs
from .integrator import SolverOptions, Trajectory, integrate, steady_state
from .linearized import PicardReport, linearized_rhs, mean_contraction_ratio, picard_solve
from .models import (
    Coefficients,
    GaussianWell,
    ModelSpec,
    PhysicalParams,
    TabulatedPotential,
    ZeroPotential,
    build_model,
    derive_coefficients,
    entropy,
    eval_matrices,
    mobility_matrix,
    model_difference,
)

__all__ = [
    "__version__",
    "Coefficients",
    "ConstantsInput",
    "ConstantsLedger",
    "EllipticityReport",
    "FluxField",
    "GaussianWell",
    "Grid",
    "LipschitzEnvelope",
    "ModelSpec",
    "NormReport",
    "OrderFit",
    "PhysicalParams",
    "PicardReport",
    "SolverOptions",
    "StateField",
    "TabulatedPotential",
    "Trajectory",
    "ZeroPotential",
    "build_model",
    "derive_coefficients",
    "det_sym_diffusion",
    "difference_norm",
    "entropy",
    "epsilon_star",
    "eval_matrices",
    "face_average",
    "fit_order",
    "integrate",
    "k_and_epsilon0",
    "lipschitz_envelopes",
    "linearized_rhs",
    "make_ledger",
    "mass_total",
    "mean_contraction_ratio",
    "mobility_matrix",
    "model_difference",
    "parabolic_constants",
    "picard_solve",
    "practical_bound",
    "scan_det_sym",
    "spatial_rhs",
    "stability_gammas",
    "steady_state",
    "trajectory_ellipticity",
    "w_norm",
]
