"""Self-similar profiles of a chemotaxis-consumption system with singular sensitivity."""
from .asymptotics import AsymptoticFit, fit_rate, weighted_decay_check
from .errors import KSProfileError, NumericalError, ValidationError
from .model import ANY_KAPPA, ModelParams, SingularityClass, SingularityTag, classify_v, derive_kappa
from .ode import (Outcome, OutcomeKind, ProfileControls, ProfileSolution, g_view,
                  integrate_profile, theta_inverse, theta_view)
from .selfsim import (MassReport, SelfSimilarSolution, delta_probe, lp_norm_constant, mass,
                      pde_residual, reconstruct, v_singularity_probe, very_singular_moment)
from .shooting import CriticalResult, classify_lambda, find_critical_lambda
from .spectral import EigenProblem, principal_eigenvalue, regime_boundary_check
from .variational import (GridControls, VariationalState, cross_check_with_shooting, energy,
                          minimize_constrained, multiplier_from_eigenfunction)

__all__ = [
    "ANY_KAPPA", "AsymptoticFit", "CriticalResult", "EigenProblem", "GridControls",
    "KSProfileError", "MassReport", "ModelParams", "NumericalError", "Outcome", "OutcomeKind",
    "ProfileControls", "ProfileSolution", "SelfSimilarSolution", "SingularityClass",
    "SingularityTag", "ValidationError", "VariationalState", "classify_lambda", "classify_v",
    "cross_check_with_shooting", "delta_probe", "derive_kappa", "energy", "find_critical_lambda",
    "fit_rate", "g_view", "integrate_profile", "lp_norm_constant", "mass",
    "minimize_constrained", "multiplier_from_eigenfunction", "pde_residual",
    "principal_eigenvalue", "reconstruct", "regime_boundary_check", "theta_inverse",
    "theta_view", "v_singularity_probe", "very_singular_moment", "weighted_decay_check",
]
