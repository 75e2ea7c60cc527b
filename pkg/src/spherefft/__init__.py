"""FFT-based interpolation, oscillatory cubature and norm tools on the unit sphere."""

from .cubature import CubatureResult, MomentVector, chebyshev_moments, integrate, moments, rate_table
from .grid import (
    BUILTIN_NAMES,
    PoleConsistencyError,
    SampleFileError,
    SphericalGrid,
    SphericalSamples,
    TestFunction,
    builtin,
    read_samples,
    sample,
    write_samples,
)
from .harmonics import legendre_q, spherical_harmonic, spherical_harmonic_grad
from .hypothesis import HypothesisReport, assemble, c_h, cheb_integral_table, verify_range
from .interpolant import InterpolantCoefficients, build, evaluate, evaluate_grid, evaluate_tensor
from .norms import NormQuadrature, convergence_table, eoc, h0_norm, h1_norm, interpolation_error

__version__ = "0.1.0"
