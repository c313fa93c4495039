"""Discretized d-dimensional space-time white noise.

Counter-based generation: every draw is a pure function of
(base_seed, replication_index, namespace, step_index, cell), realized with
numpy's Philox bit generator.  Normals come from the inverse CDF applied to
fixed-consumption uniforms, so random access by step index is exact: step k
occupies a fixed, padded block of the counter stream.

Namespaces keep consumers apart: 0 = finite-difference solver noise,
1 = spectral oracle noise, 2 = coefficient ellipticity spot checks.
"""

import numpy as np
from numpy.random import Generator, Philox, SeedSequence
from scipy.special import ndtri

from .grids import SeedSpec, SpaceTimeGrid

NS_SOLVER = 0
NS_ORACLE = 1
NS_CHECKS = 2

# smallest positive shift keeping the uniform strictly inside (0, 1)
_U_SHIFT = 2.0**-54


def bit_generator(seed: SeedSpec, namespace: int = NS_SOLVER) -> Philox:
    ss = SeedSequence(
        entropy=seed.base_seed,
        spawn_key=(namespace, seed.replication_index),
    )
    return Philox(seed=ss)


def _padded(count: int) -> int:
    # Philox advances in blocks of four 64-bit words
    return (count + 3) & ~3


def standard_normals(gen: Generator, count: int) -> np.ndarray:
    """Inverse-CDF normals with exactly one counter word consumed per draw."""
    u = gen.random(count)
    return ndtri(u + _U_SHIFT)


def normal_block(
    seed: SeedSpec, namespace: int, step_index: int, count: int
) -> np.ndarray:
    """The ``count`` normals of step ``step_index``, by counter jump."""
    bg = bit_generator(seed, namespace)
    block = _padded(count)
    bg.advance(step_index * block // 4)
    return standard_normals(Generator(bg), block)[:count]


class NoiseStream:
    """Sequential reader over one replication's stepwise normal blocks.

    Reading steps in order reproduces exactly what :func:`normal_block`
    returns for each step index.
    """

    def __init__(self, seed: SeedSpec, namespace: int, count_per_step: int):
        self._gen = Generator(bit_generator(seed, namespace))
        self.count_per_step = count_per_step
        self._block = _padded(count_per_step)

    def next_steps(self, n_steps: int) -> np.ndarray:
        """Normals for the next ``n_steps`` steps, shape (n_steps, count_per_step)."""
        raw = standard_normals(self._gen, n_steps * self._block)
        raw = raw.reshape(n_steps, self._block)
        return raw[:, : self.count_per_step]


def sample_noise_step(
    grid: SpaceTimeGrid, seed: SeedSpec, step_index: int, dim: int = 1
) -> np.ndarray:
    """White-noise increments of one time step.

    Returns shape (n_space, dim); each entry is N(0, dt*dx), independent
    across cells, components, and steps.
    """
    if not 0 <= step_index < grid.n_time:
        raise IndexError(
            f"step_index {step_index} out of range [0, {grid.n_time})"
        )
    count = grid.n_space * dim
    z = normal_block(seed, NS_SOLVER, step_index, count)
    return z.reshape(grid.n_space, dim) * np.sqrt(grid.dt * grid.dx)
