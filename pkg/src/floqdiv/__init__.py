"""Periodic dephasing of a driven oscillator: exact and Floquet solvers.

The oscillator couples through ``n^2``-type dispersive terms to a discrete
bath with commensurate frequencies, so the reduced dynamics is periodic and
purifies at every multiple of the bath period.
"""

__version__ = "0.1.0"

from .analysis import PhaseGrid, WignerField, dense_series, stroboscopic_series, wigner, wigner_norm
from .bath import INFINITE, BathSpec, drive_g, integral_G, integral_Gamma, rate_gamma
from .config import RunConfig, load_config
from .errors import (
    DimensionError,
    EigensolveFailure,
    FloqdivError,
    ModeIndexOutOfRange,
    NonConvergence,
    NumericalGateError,
    ParseError,
    StepCountTooSmall,
    TruncationError,
    ValidationError,
)
from .exact import SystemSpec, evolve_exact
from .floquet import (
    DynamicalMap,
    FloquetSpectrum,
    PropagationConfig,
    divisibility_delta,
    floquet_spectrum,
    monodromy,
    propagate_map,
    propagate_state,
)
from .fock import DensityMatrix, FockSpace, Ket, cat_state, coherent_state, fock_state

__all__ = [
    "BathSpec", "DensityMatrix", "DimensionError", "DynamicalMap", "EigensolveFailure",
    "FloqdivError", "FloquetSpectrum", "FockSpace", "INFINITE", "Ket", "ModeIndexOutOfRange",
    "NonConvergence", "NumericalGateError", "ParseError", "PhaseGrid", "PropagationConfig",
    "RunConfig", "StepCountTooSmall", "SystemSpec", "TruncationError", "ValidationError",
    "WignerField", "cat_state", "coherent_state", "dense_series", "divisibility_delta",
    "drive_g", "evolve_exact", "floquet_spectrum", "fock_state", "integral_G",
    "integral_Gamma", "load_config", "monodromy", "propagate_map", "propagate_state",
    "rate_gamma", "stroboscopic_series", "wigner", "wigner_norm",
]
