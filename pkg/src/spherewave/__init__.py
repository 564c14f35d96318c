"""
spherewave: sphere-singular Fourier multipliers, complex-order Bessel
functions, multi-parameter Sobolev norms, dyadic cone/cap decompositions,
kernel L1 laws and a spectral Duhamel wave solver on the periodic torus.
"""
from .bessel import BesselOrder, bessel_j
from .errors import (ContractError, CoverageError, DomainError, RangeError, RegimeError,
                     ResolutionError, SpherewaveError, ValidationError)
from .grid import Field, GridSpec, make_grid, norm, transform
from .multipliers import MultiplierTable, OmegaParams, SymbolClass, omega_hat
from .sobolev import SobolevParams, make_sobolev_params, sobolev_norm
from .wave import WaveConfig, solve_wave

__version__ = "0.1.0"

__all__ = [
    "BesselOrder", "bessel_j", "Field", "GridSpec", "make_grid", "norm", "transform",
    "MultiplierTable", "OmegaParams", "SymbolClass", "omega_hat", "SobolevParams",
    "make_sobolev_params", "sobolev_norm", "WaveConfig", "solve_wave",
    "SpherewaveError", "ValidationError", "ContractError", "DomainError", "RegimeError",
    "ResolutionError", "CoverageError", "RangeError",
]
