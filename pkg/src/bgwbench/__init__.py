"""Numerical workbench for critical-norm L-infinity inequalities with a logarithmic correction."""

from .coeffs import (
    DyadicCoefficients, combined_coefficient_closed_form, residuals, solve_dyadic_system,
    telescoping_combine, triangle_bound,
)
from .fields import (
    Annulus, Ball, Box, Custom, Gaussian, GridField, GridSpec, HolderCone, Indicator, LogBump,
    Polynomial, field_from_descriptor, psi, sample,
)
from .seminorms import (
    SeminormReport, bmo_norm, holder_seminorm, sobolev_seminorm, weighted_integral_at,
    weighted_sup_integral,
)
from .verifier import (
    InequalityReport, PreconditionError, SharpnessSweep, ball_telescoping_check, bmo_step_bounds,
    check_bgw_bmo, check_bgw_sobolev, lemma22_empirical_constant, m0_rule, overlap_multiplicity_check,
    polynomial_annihilation_check, power_mean_step_check, sharpness_sweep,
)

__version__ = "0.1.0"
