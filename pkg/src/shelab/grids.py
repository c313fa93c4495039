"""Space-time discretization of [0, T] x [0, 1] and seeded stream identities."""

from dataclasses import dataclass, field

import numpy as np


class StabilityError(ValueError):
    """Raised when dt exceeds the explicit-scheme bound dx^2 / 2."""


@dataclass(frozen=True)
class SpaceTimeGrid:
    """Uniform grid: ``n_space`` spatial cells on [0,1], ``n_time`` steps on [0,T].

    States live at cell centers x_j = (j + 1/2) * dx.  ``probe_x`` is snapped
    to the nearest cell center, which must be strictly interior.
    """

    n_space: int
    n_time: int
    horizon_T: float
    probe_x: float = 0.5
    explicit: bool = True
    dx: float = field(init=False)
    dt: float = field(init=False)
    probe_index: int = field(init=False)

    def __post_init__(self):
        if self.n_space < 4:
            raise ValueError("n_space must be >= 4")
        if self.n_time < 1:
            raise ValueError("n_time must be >= 1")
        if self.horizon_T <= 0:
            raise ValueError("horizon_T must be positive")
        dx = 1.0 / self.n_space
        dt = self.horizon_T / self.n_time
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "dt", dt)
        if self.explicit and dt > dx * dx / 2.0 * (1.0 + 1e-12):
            raise StabilityError(
                f"dt={dt:g} violates the explicit stability bound "
                f"dx^2/2={dx * dx / 2.0:g}"
            )
        if not 0.0 < self.probe_x < 1.0:
            raise ValueError("probe_x must lie in (0, 1)")
        idx = int(round(self.probe_x / dx - 0.5))
        idx = min(max(idx, 0), self.n_space - 1)
        if not 1 <= idx <= self.n_space - 2:
            raise ValueError("probe_x snaps to a boundary cell; move it inward")
        object.__setattr__(self, "probe_index", idx)

    @property
    def probe_center(self) -> float:
        """Actual spatial location of the probe after snapping."""
        return (self.probe_index + 0.5) * self.dx

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon_T, self.n_time + 1)


@dataclass(frozen=True)
class SeedSpec:
    """Identity of one replication's random stream.

    Distinct (base_seed, replication_index) pairs give independent streams;
    identical pairs reproduce bit-identical draws.
    """

    base_seed: int
    replication_index: int = 0

    def __post_init__(self):
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must fit in 64 unsigned bits")
        if self.replication_index < 0:
            raise ValueError("replication_index must be nonnegative")

    def with_replication(self, index: int) -> "SeedSpec":
        return SeedSpec(self.base_seed, index)
