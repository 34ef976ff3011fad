"""Harmonic analysis on rank-one hyperbolic spaces, Eisenstein series for SL2(Z),
and exact verification of Poincare-series spectral identities on finite groups."""
from .errors import (BoundaryError, ConvergenceError, DomainError, ModelError, PoleError,
                     RankOneError)
from .harish_chandra import SpectralParameter, c_function
from .spherical import QuadratureSpec, RadialFunction, psi, spherical_transform, inverse_transform
from .sobolev import FundamentalSolutionSpec, fundamental_solution, zonal_sobolev_norm
from .eisenstein2d import EisensteinSeries, constant_term, scattering_coefficient
from .regularization import regularize, verify_l2_surrogate
from .finite_model import build_model, load_model, run_suite

__version__ = "0.1.0"

__all__ = [
    "BoundaryError", "ConvergenceError", "DomainError", "ModelError", "PoleError", "RankOneError",
    "SpectralParameter", "c_function", "QuadratureSpec", "RadialFunction", "psi", "spherical_transform",
    "inverse_transform", "FundamentalSolutionSpec", "fundamental_solution", "zonal_sobolev_norm",
    "EisensteinSeries", "constant_term", "scattering_coefficient", "regularize", "verify_l2_surrogate",
    "build_model", "load_model", "run_suite",
]
