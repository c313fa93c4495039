"""Numerical laboratory for systems of stochastic heat equations.

Simulates d-dimensional systems driven by space-time white noise on
[0, 1] with zero-flux boundaries and verifies predictions about the
occupation measure of the probe-point trajectory: local-time existence
for d <= 3, its Sobolev and Hoelder regularity, non-existence for
d >= 4, quarter-order characteristic-function decay, and Gaussian-type
increment density bounds.
"""

__version__ = "1.0.0"

from .grids import SeedSpec, SpaceTimeGrid, StabilityError
from .paths import PathSample
from .solver import BlowUpError, CoefficientSet, coefficient_library, simulate_path
from .gaussian_oracle import SpectralConfig, oracle_ensemble, simulate_linear_path

__all__ = [
    "SeedSpec",
    "SpaceTimeGrid",
    "StabilityError",
    "PathSample",
    "BlowUpError",
    "CoefficientSet",
    "coefficient_library",
    "simulate_path",
    "SpectralConfig",
    "oracle_ensemble",
    "simulate_linear_path",
    "__version__",
]
