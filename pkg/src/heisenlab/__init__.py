"""Spherical means on the Heisenberg group, their spectral multipliers, and
noncommutative maximal norms of the resulting operator families."""

from __future__ import annotations

__version__ = "0.1.0"

from .special import ParameterError, SpectralPoint, bessel_eta, laguerre_poly, psi, psi_derivative, spherical_fn
from .heisenberg import (
    GeometryConfig,
    GroupElement,
    PhysicalField,
    convolve_sigma_direct,
    group_op,
    hankel_analysis,
    hankel_synthesis,
    laguerre_analysis,
    laguerre_synthesis,
    load_field,
    save_field,
    sphere_quadrature,
)
from .spectral import (
    OperatorPath,
    SpectralField,
    analytic_family,
    fractional_integral,
    g_function,
    poisson,
    spherical_mean,
    subordinated_analytic_family,
)
from .nc_lp import AlgebraElement, SolverError, SolverOptions, TracialAlgebra, lp_norm, maximal_norm
from .estimates import CheckReport, run_check

__all__ = [
    "AlgebraElement",
    "CheckReport",
    "GeometryConfig",
    "GroupElement",
    "OperatorPath",
    "ParameterError",
    "PhysicalField",
    "SolverError",
    "SolverOptions",
    "SpectralField",
    "SpectralPoint",
    "TracialAlgebra",
    "analytic_family",
    "bessel_eta",
    "convolve_sigma_direct",
    "fractional_integral",
    "g_function",
    "group_op",
    "hankel_analysis",
    "hankel_synthesis",
    "laguerre_analysis",
    "laguerre_poly",
    "laguerre_synthesis",
    "load_field",
    "lp_norm",
    "maximal_norm",
    "poisson",
    "psi",
    "psi_derivative",
    "run_check",
    "save_field",
    "sphere_quadrature",
    "spherical_fn",
    "spherical_mean",
    "subordinated_analytic_family",
]
