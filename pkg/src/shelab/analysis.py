"""Statistical verification layer: exponent fits, the small-ball criterion,
characteristic-function decay, increment-density collapse, and the
deterministic simplex-integral identity.

All operations consume frozen ensembles.  Exponent fits use medians across
replications because sup-type statistics are heavy-tailed.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from . import _accel
from .occupation import DimensionError, occupation_histogram
from .paths import PathSample


class DegenerateFitError(ValueError):
    """All levels vanished; the log-log regression is undefined."""


@dataclass(frozen=True)
class ExponentFit:
    scales: np.ndarray
    levels: np.ndarray
    slope: float
    slope_stderr: float
    intercept: float


@dataclass(frozen=True)
class SmallBallTable:
    epsilons: np.ndarray
    criterion_values: np.ndarray
    stderrs: np.ndarray
    raw_probabilities: np.ndarray
    excluded_band_measure: float


def fit_loglog(scales, levels) -> ExponentFit:
    """Least-squares slope of log(levels) against log(scales) with stderr."""
    scales = np.asarray(scales, dtype=float)
    levels = np.asarray(levels, dtype=float)
    if scales.size != levels.size or scales.size < 4:
        raise ValueError("need at least 4 (scale, level) pairs")
    if np.any(levels <= 0):
        raise DegenerateFitError("nonpositive level; cannot take logs")
    x = np.log(scales)
    y = np.log(levels)
    n = x.size
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(float(np.sum(resid**2)) / max(n - 2, 1) / sxx)
    return ExponentFit(scales, levels, float(slope), stderr, float(intercept))


def _gap_steps(path: PathSample, gaps) -> list[int]:
    dt = path.dt
    out = []
    for g in gaps:
        steps = int(round(g / dt))
        if steps < 1 or abs(steps * dt - g) > 1e-9 * max(g, dt):
            raise ValueError(f"gap {g:g} not representable on the grid")
        out.append(steps)
    return out


def holder_exponent_path(ensemble: list[PathSample], gaps) -> ExponentFit:
    """Slope of the ensemble-median sup-increment against the gap size."""
    gaps = list(gaps)
    if len(gaps) < 4:
        raise ValueError("need at least 4 gaps")
    steps_list = _gap_steps(ensemble[0], gaps)
    levels = []
    for steps in steps_list:
        per_rep = []
        for p in ensemble:
            diffs = p.states[steps:] - p.states[:-steps]
            per_rep.append(float(np.max(np.linalg.norm(diffs, axis=1))))
        levels.append(float(np.median(per_rep)))
    if all(lv == 0.0 for lv in levels):
        raise DegenerateFitError("constant paths: all sup-increments are zero")
    return fit_loglog(gaps, levels)


def holder_exponent_local_time(
    ensemble: list[PathSample],
    box: tuple,
    bins: int,
    time_gaps,
    anchor_t: float | None = None,
) -> ExponentFit:
    """Temporal Hoelder slope of the histogram local time, sup over bins.

    For each gap h the level is the ensemble median of
    sup_bins |L(., anchor + h) - L(., anchor)|.
    """
    d = ensemble[0].dim
    if d >= 4:
        raise DimensionError("local time does not exist for d >= 4")
    gaps = list(time_gaps)
    if len(gaps) < 4:
        raise ValueError("need at least 4 gaps")
    horizon = ensemble[0].horizon
    t0 = horizon / 2.0 if anchor_t is None else anchor_t
    dt = ensemble[0].dt
    n0 = int(round(t0 / dt))
    steps_list = _gap_steps(ensemble[0], gaps)
    levels = []
    for steps in steps_list:
        per_rep = []
        for p in ensemble:
            # histogram of the window alone = L(., t0 + h) - L(., t0)
            window = p.states[n0 : n0 + steps]
            dens = _window_histogram(window, box, bins, dt)
            per_rep.append(float(np.max(np.abs(dens))))
        levels.append(float(np.median(per_rep)))
    return fit_loglog(gaps, levels)


def _window_histogram(points: np.ndarray, box, bins: int, dt: float) -> np.ndarray:
    lo = np.atleast_1d(np.asarray(box[0], dtype=float))
    hi = np.atleast_1d(np.asarray(box[1], dtype=float))
    edges = [np.linspace(lo[a], hi[a], bins + 1) for a in range(lo.size)]
    counts, _ = np.histogramdd(points, bins=edges)
    vol = float(np.prod((hi - lo) / bins))
    return counts * dt / vol


def small_ball_criterion(
    ensemble: list[PathSample],
    epsilons,
    t: float,
    subsample_to: int = 512,
) -> SmallBallTable:
    """eps^(-d) * t^2 * P-hat[||u(s) - u(r)|| <= eps] over grid pairs.

    Pairs closer than two native time steps are excluded (discretization
    artifact); the excluded band's time-measure is reported.  The raw
    probability table is monotone nonincreasing in eps by construction.
    """
    eps = np.asarray(sorted(epsilons, reverse=True), dtype=float)
    d = ensemble[0].dim
    dt = ensemble[0].dt
    n_t = int(round(t / dt))
    if n_t < 4 or t > ensemble[0].horizon + 1e-12:
        raise ValueError("t out of range for the ensemble grid")
    stride = max(1, n_t // subsample_to)
    min_lag = max(1, int(math.ceil(2.0 * dt / (stride * dt))))
    fracs = np.empty((len(ensemble), eps.size))
    for i, p in enumerate(ensemble):
        sub = np.ascontiguousarray(p.states[: n_t + 1 : stride])
        counts, total = _accel.pair_counts(sub, eps**2, min_lag)
        fracs[i] = counts / total
    mean_p = fracs.mean(axis=0)
    se_p = fracs.std(ddof=1, axis=0) / math.sqrt(len(ensemble))
    scale = t * t / eps**d
    sub_dt = stride * dt
    excluded = 2.0 * t * (min_lag * sub_dt)  # measure of the near-diagonal band
    return SmallBallTable(
        epsilons=eps,
        criterion_values=mean_p * scale,
        stderrs=se_p * scale,
        raw_probabilities=mean_p,
        excluded_band_measure=excluded,
    )


def charfn_decay_probe(
    ensemble: list[PathSample],
    m: int,
    time_points,
    v_grid,
):
    """Monte Carlo modulus of the joint characteristic function of increments.

    Returns rows (v, modulus, stderr, dimensionless_scales) where the scales
    are |v_{j,l}| (t_j - t_{j-1})^{1/4}.
    """
    if m not in (1, 2):
        raise ValueError("m must be 1 or 2")
    time_points = list(time_points)
    # either the m increment endpoints (t_0 = 0 implied) or all m + 1 times
    tp = time_points if len(time_points) == m + 1 else [0.0] + time_points
    if len(tp) != m + 1 or any(b <= a for a, b in zip(tp, tp[1:])):
        raise ValueError("time_points must be strictly increasing, length m or m+1")
    d = ensemble[0].dim
    dt = ensemble[0].dt
    idx = [int(round(s / dt)) for s in tp]
    incs = np.stack(
        [
            np.stack([p.states[idx[j + 1]] - p.states[idx[j]] for j in range(m)])
            for p in ensemble
        ]
    )  # (reps, m, d)
    rows = []
    for v in v_grid:
        v = np.asarray(v, dtype=float).reshape(m, d)
        phases = np.einsum("rjd,jd->r", incs, v)
        z = np.exp(1j * phases)
        mean = z.mean()
        se = math.sqrt(z.real.var(ddof=1) + z.imag.var(ddof=1)) / math.sqrt(len(z))
        scales = np.abs(v) * np.array(
            [(tp[j + 1] - tp[j]) ** 0.25 for j in range(m)]
        )[:, None]
        rows.append((v.copy(), float(abs(mean)), se, scales))
    return rows


class UnderResolvedError(ValueError):
    """Too few samples in the unit ball for the requested KDE resolution."""


def increment_density_kde(
    ensemble: list[PathSample],
    pairs,
    grid: np.ndarray,
    bandwidth: float | None = None,
):
    """KDE of the rescaled increment z = (u(t) - u(s)) / (t - s)^(1/4).

    Returns (tables, collapse, lower_bound, pooled) where ``tables`` maps the
    pair to its density on the lattice, ``collapse`` is the max over pairs of
    the relative sup-distance between rescaled densities, ``lower_bound`` is
    the min of the pooled density over lattice points with ||z|| <= 1.
    """
    d = ensemble[0].dim
    if d > 3:
        raise DimensionError("density estimation limited to d <= 3")
    dt = ensemble[0].dt
    grid = np.ascontiguousarray(np.atleast_2d(grid), dtype=float)
    samples_by_pair = []
    for s, t in pairs:
        if t - s < 4.0 * dt - 1e-12:
            raise ValueError("pair gap must be at least 4 time steps")
        i, j = int(round(s / dt)), int(round(t / dt))
        z = np.stack([(p.states[j] - p.states[i]) for p in ensemble])
        samples_by_pair.append(z / (t - s) ** 0.25)
    pooled = np.concatenate(samples_by_pair, axis=0)
    if bandwidth is None:
        spread = float(pooled.std(ddof=1))
        bandwidth = 0.3 * spread * len(pooled) ** (-1.0 / (d + 4))
    in_ball = np.sum(np.sum(pooled**2, axis=1) <= 1.0)
    n_cells = max(1, int(np.sum(np.sum(grid**2, axis=1) <= 1.0)))
    if in_ball / n_cells < 50:
        raise UnderResolvedError(
            f"{in_ball} samples over {n_cells} unit-ball lattice cells"
        )
    tables = {}
    for (s, t), z in zip(pairs, samples_by_pair):
        tables[(s, t)] = _accel.kde_lattice(
            np.ascontiguousarray(z), grid, bandwidth
        )
    densities = list(tables.values())
    ref = max(float(v.max()) for v in densities)
    collapse = 0.0
    for a in range(len(densities)):
        for b in range(a + 1, len(densities)):
            collapse = max(
                collapse, float(np.max(np.abs(densities[a] - densities[b]))) / ref
            )
    pooled_density = _accel.kde_lattice(
        np.ascontiguousarray(pooled), grid, bandwidth
    )
    mask = np.sum(grid**2, axis=1) <= 1.0
    lower_bound = float(pooled_density[mask].min()) if mask.any() else math.nan
    return tables, collapse, lower_bound, pooled_density


def ehm_identity_check(m: int, b_exponents, h: float):
    """Simplex integral of prod (s_j - s_{j-1})^(-b_j) against its closed form.

    Left side: iterated adaptive quadrature with the substitution
    y - x = w^(1/(1-b)) removing each endpoint singularity.  Right side:
    h^(m - sum b) * prod Gamma(1 - b_j) / Gamma(1 + m - sum b_j).
    """
    b = list(b_exponents)
    if len(b) != m or not 1 <= m <= 4:
        raise ValueError("need 1 <= m <= 4 exponents")
    if any(bj >= 1.0 for bj in b):
        raise ValueError("divergent integral: every exponent must be < 1")
    if h <= 0:
        raise ValueError("h must be positive")

    def level(j: int, x: float) -> float:
        # integral over s_j in (x, 1] of (s_j - x)^(-b_j) * level(j+1, s_j)
        bj = b[j]
        p = 1.0 - bj
        if j == m - 1:
            return (1.0 - x) ** p / p
        top = (1.0 - x) ** p

        def integrand(w):
            y = x + w ** (1.0 / p)
            return level(j + 1, min(y, 1.0)) / p

        val, _ = quad(integrand, 0.0, top, limit=200, epsabs=1e-12, epsrel=1e-11)
        return val

    sum_b = sum(b)
    lhs = level(0, 0.0) * h ** (m - sum_b)
    rhs = (
        h ** (m - sum_b)
        * math.prod(gamma_fn(1.0 - bj) for bj in b)
        / gamma_fn(1.0 + m - sum_b)
    )
    return lhs, rhs, abs(lhs - rhs) / rhs
