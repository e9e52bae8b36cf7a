"""Numerics for mixed-Fourier-norm Bergman spaces on the upper half-plane.

Modules:

``core``        parameters, grids, sampled functions, mixed norms, CSV I/O
``specfun``     incomplete gamma, theta, psi and its inverse beta
``transforms``  U1, U2, R0, the Paley-Wiener pair and the projection
``toeplitz``    vertical symbols, the spectral function gamma, spectra
``cli``         command-line front end
"""

from .core import (
    BoundaryDensity,
    GridFunction,
    HalfPlaneGrid,
    SpaceParams,
    lq_norm,
    make_grid,
    mixed_norm,
    nu_weight,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryDensity",
    "GridFunction",
    "HalfPlaneGrid",
    "SpaceParams",
    "lq_norm",
    "make_grid",
    "mixed_norm",
    "nu_weight",
]
