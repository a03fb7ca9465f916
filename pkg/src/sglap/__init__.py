"""Magnetic Laplacian spectra on finite Sierpinski gasket graphs.

Spectral decimation for the line-bundle (magnetic) Laplacian, closed-form
spectra at half-integer flux, Hofstadter-style butterfly rasters, exact
determinant identities, and cycle-rooted spanning forest enumeration.
"""

__version__ = "0.1.0"

from .gasket import GasketGraph, UnitCell, build_gasket, dim_n
from .gauge import Connection, FluxPair, build_connection, restrict_connection

__all__ = [
    "GasketGraph",
    "UnitCell",
    "build_gasket",
    "dim_n",
    "FluxPair",
    "Connection",
    "build_connection",
    "restrict_connection",
    "__version__",
]
