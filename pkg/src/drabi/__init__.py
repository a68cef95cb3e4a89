"""Spin-subspace diagonalization of Fulton-Gouterman Hamiltonians and Dunkl-type spectra."""

from drabi.errors import (
    ConvergenceFailure,
    JcmBoundary,
    NonRealSpectrum,
    NonUnitaryError,
    NotBalanceable,
    NotFGForm,
    SpectralCollapse,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceFailure",
    "JcmBoundary",
    "NonRealSpectrum",
    "NonUnitaryError",
    "NotBalanceable",
    "NotFGForm",
    "SpectralCollapse",
]
