import math

import numpy as np
import pytest

from shelab.grids import SeedSpec, SpaceTimeGrid
from shelab.noise import (
    NS_ORACLE,
    NS_SOLVER,
    NoiseStream,
    bit_generator,
    normal_block,
    sample_noise_step,
    standard_normals,
)


@pytest.fixture
def grid():
    # dt = 1e-3 with dx = 1/128 is fine for noise checks (no explicit scheme)
    return SpaceTimeGrid(128, 8000, 8.0, 0.5, explicit=False)


def test_noise_step_determinism(grid):
    seed = SeedSpec(42, 3)
    a = sample_noise_step(grid, seed, 7)
    b = sample_noise_step(grid, seed, 7)
    assert a.shape == (128, 1)
    assert np.array_equal(a, b)


def test_noise_step_out_of_range(grid):
    with pytest.raises(IndexError):
        sample_noise_step(grid, SeedSpec(42), grid.n_time)
    with pytest.raises(IndexError):
        sample_noise_step(grid, SeedSpec(42), -1)


def test_marginal_variance_dt_dx(grid):
    # pooled over ~1e6 entries; variance should be dt*dx = 7.8125e-6
    seed = SeedSpec(2024)
    draws = np.concatenate(
        [sample_noise_step(grid, seed, k).ravel() for k in range(8000)]
    )
    assert draws.size >= 1_000_000
    target = grid.dt * grid.dx
    assert target == 7.8125e-6
    var = draws.var(ddof=1)
    se = target * math.sqrt(2.0 / (draws.size - 1))
    assert abs(var - target) < 3.0 * se
    mean_se = math.sqrt(target / draws.size)
    assert abs(draws.mean()) < 4.0 * mean_se


def test_cross_cell_independence():
    # two distinct cells over 1e5 steps: sample correlation ~ 0
    stream = NoiseStream(SeedSpec(7), NS_SOLVER, 8)
    block = stream.next_steps(100_000)
    a, b = block[:, 2], block[:, 5]
    corr = np.corrcoef(a, b)[0, 1]
    assert abs(corr) < 4.0 / math.sqrt(a.size)


def test_replication_stream_independence():
    n = 100_000
    a = NoiseStream(SeedSpec(7, 0), NS_SOLVER, 4).next_steps(n // 4).ravel()
    b = NoiseStream(SeedSpec(7, 1), NS_SOLVER, 4).next_steps(n // 4).ravel()
    assert not np.array_equal(a, b)
    corr = np.corrcoef(a, b)[0, 1]
    assert abs(corr) < 4.0 / math.sqrt(a.size)


def test_namespace_separation():
    a = normal_block(SeedSpec(9), NS_SOLVER, 0, 64)
    b = normal_block(SeedSpec(9), NS_ORACLE, 0, 64)
    assert not np.array_equal(a, b)


def test_random_access_matches_sequential():
    seed = SeedSpec(11, 2)
    count = 37  # deliberately not a multiple of the counter block
    stream = NoiseStream(seed, NS_SOLVER, count)
    seq = stream.next_steps(12)
    for step in (0, 1, 5, 11):
        jump = normal_block(seed, NS_SOLVER, step, count)
        assert np.array_equal(seq[step], jump)


def test_standard_normals_finite_and_unit_scale():
    gen = np.random.Generator(bit_generator(SeedSpec(1)))
    z = standard_normals(gen, 200_000)
    assert np.all(np.isfinite(z))
    assert abs(z.mean()) < 4.0 / math.sqrt(z.size)
    assert abs(z.var(ddof=1) - 1.0) < 3.0 * math.sqrt(2.0 / z.size)
