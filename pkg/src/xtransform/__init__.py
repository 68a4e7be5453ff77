"""Profile functions M_n, exponential transforms of densities and their moment sequences."""

from .profile import (ProfileEvaluator, ProfileParams, gamma_alpha, h_polynomials, m_n, phi_eval,
                      profile_eval, profile_series_eval, sigma_coeffs, t_n)
from .potential import Ball, Density, Grid, Kernel, e_rho, j_functional, v_rho
from .report import InequalitySlack, VerificationReport
from .variational import extremal_ball, phi_functional

__all__ = [
    "Ball", "Density", "Grid", "InequalitySlack", "Kernel", "ProfileEvaluator", "ProfileParams",
    "VerificationReport", "e_rho", "extremal_ball", "gamma_alpha", "h_polynomials", "j_functional",
    "m_n", "phi_eval", "phi_functional", "profile_eval", "profile_series_eval", "sigma_coeffs",
    "t_n", "v_rho",
]
