import math

import numpy as np
import pytest

from shelab import kernel as kn

# regression constants pinned from the independent reflection-series oracle
G_001_CENTER = 2.8209479178171355
SCAN_MIN = 1.000000000027776
SCAN_MAX = 4.001341850662614


def test_equilibrium_value():
    for x, y in [(0.0, 0.0), (0.3, 0.9), (0.5, 0.5)]:
        assert abs(float(kn.neumann_kernel(10.0, x, y)) - 1.0) < 1e-12


def test_mass_conservation():
    assert abs(kn.kernel_mass(0.05, 0.3) - 1.0) < 1e-10
    for t in (0.001, 0.01, 0.25):
        for x in (0.0, 0.5, 1.0):
            assert abs(kn.kernel_mass(t, x) - 1.0) < 1e-10


def test_pinned_center_value():
    assert float(kn.neumann_kernel(0.01, 0.5, 0.5)) == pytest.approx(
        G_001_CENTER, abs=1e-12
    )


def test_symmetry():
    pts = np.linspace(0.0, 1.0, 11)
    for t in (0.01, 0.05, 0.25):
        for x in pts:
            for y in pts:
                a = float(kn.neumann_kernel(t, x, y))
                b = float(kn.neumann_kernel(t, y, x))
                assert abs(a - b) < 1e-14


def test_series_mutual_agreement():
    pts = np.linspace(0.0, 1.0, 11)
    for t in (0.005, 0.01, 0.05):
        for x in pts:
            diff = np.abs(kn.spectral_kernel(t, x, pts) - kn.reflection_kernel(t, x, pts))
            assert float(diff.max()) < 1e-10


def test_domain_error_below_min_t():
    with pytest.raises(kn.KernelDomainError):
        kn.neumann_kernel(1e-5, 0.5, 0.5)


def test_semigroup_residuals():
    assert kn.semigroup_residual(0.1, 0.2, 0.3, 0.7) < 1e-8
    assert kn.semigroup_residual(0.05, 0.05, 0.4, 0.4) < 1e-8
    # equilibrium regime: both sides are essentially 1
    assert kn.semigroup_residual(5.0, 5.0, 0.1, 0.9) < 1e-12


def test_bound_ratio_properties():
    assert kn.gaussian_bound_ratio(0.01, 0.5, 0.5) >= 1.0
    # boundary doubling: the dominant image term equals the direct term
    assert kn.gaussian_bound_ratio(0.01, 0.0, 0.0) == pytest.approx(2.0, abs=1e-6)
    with pytest.raises(kn.KernelDomainError):
        kn.gaussian_bound_ratio(0.5, 0.5, 0.5)


def test_bound_ratio_scan_pinned():
    lo, hi = kn.bound_ratio_scan()
    assert lo >= 1.0 - 1e-9
    assert lo == pytest.approx(SCAN_MIN, rel=1e-12)
    assert hi == pytest.approx(SCAN_MAX, rel=1e-12)


def test_variance_degenerate_and_errors():
    assert kn.linear_increment_variance(0.1, 0.1, 0.5) == 0.0
    with pytest.raises(kn.KernelDomainError):
        kn.linear_increment_variance(0.2, 0.1, 0.5)
    with pytest.raises(kn.KernelDomainError):
        kn.linear_increment_variance(-0.1, 0.1, 0.5)


def test_variance_against_quadrature_oracle():
    exact = kn.linear_increment_variance(0.0, 0.1, 0.5)
    quad = kn.linear_increment_variance_quadrature(0.0, 0.1, 0.5)
    assert abs(exact - quad) / exact < 1e-8
    exact = kn.linear_increment_variance(0.05, 0.2, 0.3)
    quad = kn.linear_increment_variance_quadrature(0.05, 0.2, 0.3)
    assert abs(exact - quad) / exact < 1e-8


def test_variance_small_gap_scaling():
    s = 0.1
    gaps = np.array([1e-4, 3e-4, 1e-3, 3e-3, 1e-2])
    vals = [kn.linear_increment_variance(s, s + g, 0.5) for g in gaps]
    slope = np.polyfit(np.log(gaps), np.log(vals), 1)[0]
    assert abs(slope - 0.5) < 0.02
