import math

import numpy as np
import pytest

from shelab import analysis as an
from shelab.gaussian_oracle import oracle_ensemble
from shelab.grids import SeedSpec, SpaceTimeGrid
from shelab.occupation import DimensionError
from shelab.paths import PathSample
from shelab.solver import coefficient_library, solver_ensemble


def _ramp_path(n_time=1024):
    times = np.linspace(0.0, 1.0, n_time + 1)
    return PathSample(times, times[:, None].copy(), SeedSpec(0))


def _const_path(n_time=64):
    times = np.linspace(0.0, 1.0, n_time + 1)
    return PathSample(times, np.zeros((n_time + 1, 1)), SeedSpec(0))


@pytest.fixture(scope="module")
def linear_ens():
    grid = SpaceTimeGrid(64, 2048, 1.0, 0.5, explicit=False)
    return oracle_ensemble(grid, base_seed=31, n_reps=60)


def test_fit_loglog_recovers_powerlaw():
    scales = np.array([0.5, 0.25, 0.125, 0.0625])
    fit = an.fit_loglog(scales, 3.0 * scales**0.7)
    assert fit.slope == pytest.approx(0.7, abs=1e-12)
    assert fit.slope_stderr == pytest.approx(0.0, abs=1e-10)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-10)


def test_fit_loglog_validation():
    with pytest.raises(ValueError):
        an.fit_loglog([1.0, 0.5, 0.25], [1.0, 1.0, 1.0])
    with pytest.raises(an.DegenerateFitError):
        an.fit_loglog([1.0, 0.5, 0.25, 0.125], [1.0, 1.0, 0.0, 1.0])


def test_holder_path_ramp_slope_one():
    fit = an.holder_exponent_path([_ramp_path()] * 3, [2.0**-k for k in range(3, 7)])
    assert abs(fit.slope - 1.0) <= 0.01


def test_holder_path_constant_degenerate():
    with pytest.raises(an.DegenerateFitError):
        an.holder_exponent_path([_const_path()] * 3, [2.0**-k for k in range(1, 5)])


def test_holder_path_gap_validation(linear_ens):
    with pytest.raises(ValueError):
        an.holder_exponent_path(linear_ens, [0.5, 0.25])
    with pytest.raises(ValueError):
        an.holder_exponent_path(linear_ens, [0.1, 0.3, 0.017, 0.019])


def test_holder_local_time_ramp_slope_one():
    # u(t) = t occupies one 1/8-wide bin per window once the gap is below the
    # bin width; the sup level is then h / bin-width, linear in h
    fit = an.holder_exponent_local_time(
        [_ramp_path()] * 3, ([0.0], [1.0]), 8, [2.0**-k for k in range(4, 8)]
    )
    assert abs(fit.slope - 1.0) <= 0.02


def test_holder_local_time_dimension_guard():
    times = np.linspace(0.0, 1.0, 65)
    p = PathSample(times, np.zeros((65, 4)), SeedSpec(0))
    with pytest.raises(DimensionError):
        an.holder_exponent_local_time(
            [p] * 3, ([0.0] * 4, [1.0] * 4), 8, [0.5, 0.25, 0.125, 0.0625]
        )


def test_small_ball_saturates_above_diameter(linear_ens):
    t = 1.0
    diam = max(
        float(np.max(p.states) - np.min(p.states)) for p in linear_ens
    )
    eps = [2.0 * diam, diam + 1.0]
    with pytest.raises(Exception):
        an.fit_loglog(eps, eps)  # guard misuse: not enough scales
    table = an.small_ball_criterion(linear_ens, eps + [0.2, 0.1], t)
    # all pairs are within the two large epsilons: probability exactly 1
    assert table.raw_probabilities[0] == 1.0
    assert table.criterion_values[0] == pytest.approx(t * t / table.epsilons[0])
    # probability monotone nonincreasing as eps shrinks
    assert np.all(np.diff(table.raw_probabilities) <= 1e-15)
    assert table.excluded_band_measure > 0.0


def test_small_ball_validation(linear_ens):
    with pytest.raises(ValueError):
        an.small_ball_criterion(linear_ens, [0.1], 2.0)


def test_charfn_at_zero_and_bounded(linear_ens):
    rows = an.charfn_decay_probe(linear_ens, 1, [0.5, 1.0], [[[0.0]], [[3.0]]])
    assert rows[0][1] == pytest.approx(1.0, abs=1e-14)
    for _, modulus, stderr, scales in rows:
        assert modulus <= 1.0 + 1e-12
        assert stderr >= 0.0
    # dimensionless scale bookkeeping: |v| (t - s)^(1/4)
    assert rows[1][3][0, 0] == pytest.approx(3.0 * 0.5**0.25)


def test_charfn_validation(linear_ens):
    with pytest.raises(ValueError):
        an.charfn_decay_probe(linear_ens, 3, [0.2, 0.4, 0.6, 0.8], [])
    with pytest.raises(ValueError):
        an.charfn_decay_probe(linear_ens, 2, [0.5, 0.25, 0.75], [])


def test_kde_under_resolved():
    grid = SpaceTimeGrid(16, 128, 0.5, 0.5, explicit=False)
    tiny = oracle_ensemble(grid, base_seed=5, n_reps=3)
    lattice = np.arange(-2.0, 2.01, 0.05)[:, None]
    with pytest.raises(an.UnderResolvedError):
        an.increment_density_kde(tiny, [(0.25, 0.5)], lattice)


def test_kde_pair_gap_validation(linear_ens):
    lattice = np.arange(-2.0, 2.01, 0.1)[:, None]
    dt = linear_ens[0].dt
    with pytest.raises(ValueError):
        an.increment_density_kde(linear_ens, [(0.5, 0.5 + dt)], lattice)


def test_symmetric_coefficients_even_density():
    # b = 0 and even sigma make u and -u equal in law
    grid = SpaceTimeGrid(16, 512, 0.5, 0.5)
    ens = solver_ensemble(coefficient_library("evendiag", 1), grid, 61, 2400)
    lattice = np.arange(-1.5, 1.51, 0.1)[:, None]
    bw = 0.2
    tables, _, _, pooled = an.increment_density_kde(
        ens, [(0.25, 0.5)], lattice, bandwidth=bw
    )
    n = len(ens)
    z = lattice[:, 0]
    for i, zi in enumerate(z):
        j = int(np.argmin(np.abs(z + zi)))
        diff = abs(pooled[i] - pooled[j])
        se = math.sqrt((pooled[i] + pooled[j]) / (2 * math.sqrt(math.pi) * n * bw))
        assert diff < 4.0 * se + 1e-3


def test_ehm_analytic_cases():
    lhs, rhs, res = an.ehm_identity_check(1, [0.5], 1.0)
    assert rhs == pytest.approx(2.0, abs=1e-14)
    assert res < 1e-10
    lhs, rhs, res = an.ehm_identity_check(2, [0.5, 0.5], 1.0)
    assert rhs == pytest.approx(math.pi, abs=1e-14)
    assert res < 1e-8
    lhs, rhs, res = an.ehm_identity_check(3, [0.25, 0.25, 0.25], 0.5)
    assert rhs == pytest.approx(0.15174705850162493, rel=1e-12)
    assert res < 1e-6


def test_ehm_validation():
    with pytest.raises(ValueError):
        an.ehm_identity_check(2, [0.5, 1.0], 1.0)
    with pytest.raises(ValueError):
        an.ehm_identity_check(2, [0.5], 1.0)
    with pytest.raises(ValueError):
        an.ehm_identity_check(1, [0.5], 0.0)
    with pytest.raises(ValueError):
        an.ehm_identity_check(5, [0.1] * 5, 1.0)
