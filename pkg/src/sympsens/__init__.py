"""Symplectic eigenvalues of positive definite matrices and their first-order sensitivity."""

from .core import (ConvergenceError, EigenDecomposition, NotPositiveDefiniteError, SympsensError,
                   condition_number, sqrt_pd)
from .harness import (FDReport, SpectrumSpec, fd_directional_derivative, nonconvexity_example,
                      norm_bound_check, pd_with_spectrum, random_symplectic)
from .sensitivity import (CLUSTER_TOL, GapConditionError, MultiplicityIndices, d_dderiv,
                          derivative_report, multiplicity_indices, reduce_direction, sigma_dderiv,
                          sigma_gradient, sigma_m)
from .subdifferential import (NotComparableError, clarke_extreme_points, clarke_mp_dderiv,
                              fenchel_extreme_points, monotonicity_check, support_gap)
from .williamson import (ResidualError, WilliamsonDecomposition, extend_to_symplectic_basis,
                         standard_j, symplectic_eigenvalues, verify_eigen_pairs, verify_symplectic,
                         williamson)

__version__ = "0.1.0"

__all__ = [
    "CLUSTER_TOL", "ConvergenceError", "EigenDecomposition", "FDReport", "GapConditionError",
    "MultiplicityIndices", "NotComparableError", "NotPositiveDefiniteError", "ResidualError",
    "SpectrumSpec", "SympsensError", "WilliamsonDecomposition", "clarke_extreme_points",
    "clarke_mp_dderiv", "condition_number", "d_dderiv", "derivative_report",
    "extend_to_symplectic_basis", "fd_directional_derivative", "fenchel_extreme_points",
    "monotonicity_check", "multiplicity_indices", "nonconvexity_example", "norm_bound_check",
    "pd_with_spectrum", "random_symplectic", "reduce_direction", "sigma_dderiv", "sigma_gradient",
    "sigma_m", "sqrt_pd", "standard_j", "support_gap", "symplectic_eigenvalues",
    "verify_eigen_pairs", "verify_symplectic", "williamson",
]
