"""Occupation measures, local times, the Fourier functional, and the
Sobolev-energy diagnostic for local-time existence.

Two local-time estimators are implemented: the occupation histogram and the
truncated Fourier inversion of Berman's representation.  They are each
other's oracle; neither is ever checked against itself.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .paths import PathSample


class DimensionError(ValueError):
    """Operation requested in a dimension where the object does not exist."""


@dataclass(frozen=True)
class OccupationDensity:
    """Histogram estimate of the local time on a rectangular box.

    ``values`` has shape (bins,)*d in units of time per unit volume.
    ``outside_mass`` is the occupation time falling outside the box; it is
    reported, never silently dropped.
    """

    box_lo: np.ndarray
    box_hi: np.ndarray
    bins_per_axis: int
    values: np.ndarray
    horizon_t: float
    outside_mass: float

    @property
    def dim(self) -> int:
        return self.box_lo.shape[0]

    @property
    def bin_widths(self) -> np.ndarray:
        return (self.box_hi - self.box_lo) / self.bins_per_axis

    @property
    def bin_volume(self) -> float:
        return float(np.prod(self.bin_widths))

    def bin_centers(self, axis: int) -> np.ndarray:
        w = self.bin_widths[axis]
        return self.box_lo[axis] + w * (np.arange(self.bins_per_axis) + 0.5)

    @property
    def total_mass(self) -> float:
        return float(self.values.sum() * self.bin_volume)


@dataclass(frozen=True)
class FourierFunctional:
    """f(xi) = int_0^t exp(i <xi, u(s)>) ds for one path."""

    xi: np.ndarray
    value: complex
    horizon_t: float


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    n_reps: int


def _occupation_weights(path: PathSample) -> tuple[np.ndarray, float]:
    # left-endpoint rule: state at t_j occupies [t_j, t_j + dt)
    return path.states[:-1], path.dt


def occupation_histogram(
    path: PathSample, box: tuple, bins_per_axis: int
) -> OccupationDensity:
    """Each time step contributes dt to the bin holding its state."""
    lo = np.atleast_1d(np.asarray(box[0], dtype=float))
    hi = np.atleast_1d(np.asarray(box[1], dtype=float))
    if bins_per_axis < 2:
        raise ValueError("bins_per_axis must be >= 2")
    if not np.all(lo < hi):
        raise ValueError("need lo < hi componentwise")
    pts, dt = _occupation_weights(path)
    d = path.dim
    edges = [np.linspace(lo[a], hi[a], bins_per_axis + 1) for a in range(d)]
    counts, _ = np.histogramdd(pts, bins=edges)
    inside = int(counts.sum())
    mass_inside = inside * dt
    vol = float(np.prod((hi - lo) / bins_per_axis))
    return OccupationDensity(
        box_lo=lo,
        box_hi=hi,
        bins_per_axis=bins_per_axis,
        values=counts * dt / vol,
        horizon_t=path.horizon,
        outside_mass=path.horizon - mass_inside,
    )


def fourier_functional(path: PathSample, xi) -> FourierFunctional:
    """Left-endpoint quadrature of the path's Fourier functional."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    pts, dt = _occupation_weights(path)
    val = _accel.fourier_sums(pts, xi[None, :], dt)[0]
    return FourierFunctional(xi=xi, value=complex(val), horizon_t=path.horizon)


def fourier_functional_lattice(path: PathSample, xis: np.ndarray) -> np.ndarray:
    """f(xi) for many frequencies at once; shape (n_freq,)."""
    pts, dt = _occupation_weights(path)
    return _accel.fourier_sums(pts, np.ascontiguousarray(xis, dtype=float), dt)


def _frequency_lattice(cutoff_N: float, freq_step: float, d: int) -> np.ndarray:
    axis = np.arange(-cutoff_N, cutoff_N + freq_step / 2, freq_step)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1), axis


def local_time_fourier_inversion(
    path: PathSample,
    point,
    cutoff_N: float,
    freq_step: float,
    return_imag: bool = False,
):
    """Truncated inversion of Berman's representation at one space point.

    Trapezoid weights on the uniform frequency lattice over [-N, N]^d; the
    real part is the estimate, the imaginary residue is diagnostic.
    """
    point = np.atleast_1d(np.asarray(point, dtype=float))
    d = path.dim
    if d >= 4:
        raise DimensionError("local time does not exist for d >= 4")
    if freq_step > cutoff_N:
        raise ValueError("freq_step must not exceed cutoff_N")
    lattice, axis = _frequency_lattice(cutoff_N, freq_step, d)
    fvals = fourier_functional_lattice(path, lattice)
    w1 = np.full(axis.size, freq_step)
    w1[0] = w1[-1] = freq_step / 2.0
    w = w1
    for _ in range(d - 1):
        w = np.multiply.outer(w, w1)
    phases = np.exp(-1j * lattice @ point)
    total = np.sum(phases * fvals * w.ravel()) / (2.0 * math.pi) ** d
    if return_imag:
        return float(total.real), float(abs(total.imag))
    return float(total.real)


def occupation_formula_residual(
    path: PathSample, density: OccupationDensity, test_fn
) -> float:
    """Relative gap between the two sides of the occupation formula.

    Left side: time quadrature of f(u(s)).  Right side: space quadrature of
    f against the histogram local time, plus f evaluated on out-of-box
    samples (out-of-box occupation is reported, not dropped).
    """
    pts, dt = _occupation_weights(path)
    time_side = float(np.sum(test_fn(pts)) * dt)
    centers = np.meshgrid(
        *[density.bin_centers(a) for a in range(density.dim)], indexing="ij"
    )
    grid_pts = np.stack([c.ravel() for c in centers], axis=1)
    space_side = float(
        np.sum(test_fn(grid_pts) * density.values.ravel()) * density.bin_volume
    )
    if density.outside_mass > 0:
        inside = np.all(
            (pts >= density.box_lo) & (pts < density.box_hi), axis=1
        )
        space_side += float(np.sum(test_fn(pts[~inside])) * dt)
    return abs(time_side - space_side) / (abs(time_side) + 1e-12)


def sobolev_energy(
    ensemble: list[PathSample],
    alpha: float,
    radius_R: float,
    freq_step: float,
    radii_partial=None,
) -> MonteCarloEstimate | tuple:
    """Monte Carlo average of the lattice quadrature of ||xi||^(2 alpha) |f(xi)|^2.

    With ``radii_partial`` the running quadrature is also reported at the
    listed smaller cutoffs (nested sub-lattices at no extra cost), which is
    how the R-refinement stabilization diagnostic is produced.

    |f(xi)|^2 from the left-endpoint sum carries a deterministic diagonal
    term of exactly t*dt at every frequency (the j = k pairs).  It is an
    artifact of discretizing the double time integral, grows like R^(d+2a)
    after weighting, and is subtracted so the estimator is unbiased for the
    off-diagonal double integral.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    d = ensemble[0].dim
    if d > 4:
        raise DimensionError("diagnostic limited to d <= 4")
    lattice, axis = _frequency_lattice(radius_R, freq_step, d)
    norms2 = np.sum(lattice**2, axis=1)
    weight = norms2 ** alpha if alpha > 0 else np.ones_like(norms2)
    radii = sorted(set((radii_partial or [])) | {radius_R})
    quad_w = {}
    for r in radii:
        sub = np.abs(axis) <= r + 1e-12
        w1 = np.where(sub, freq_step, 0.0)
        ends = np.nonzero(sub)[0]
        w1[ends[0]] *= 0.5
        w1[ends[-1]] *= 0.5
        w = w1
        for _ in range(d - 1):
            w = np.multiply.outer(w, w1)
        quad_w[r] = w.ravel()
    per_rep = {r: [] for r in radii}
    for path in ensemble:
        f2 = np.abs(fourier_functional_lattice(path, lattice)) ** 2
        f2 -= path.horizon * path.dt
        contrib = weight * f2
        for r in radii:
            per_rep[r].append(float(contrib @ quad_w[r]))
    out = {}
    for r in radii:
        vals = np.asarray(per_rep[r])
        out[r] = MonteCarloEstimate(
            float(vals.mean()),
            float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0,
            len(vals),
        )
    if radii_partial is None:
        return out[radius_R]
    return out
