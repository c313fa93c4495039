"""Hot numeric kernels.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
fallback.  Set the environment variable ``SHELAB_NO_NUMBA=1`` to force the
numpy path (useful for debugging and for the benchmark in
``benchmarks/bench_kernels.py``).  The active path is fixed at import time
and reported by :data:`USING_NUMBA`.

Coefficient sets from the built-in library are dispatched by an integer
code so the solver loop stays jit-compilable:

==== =======================================================
code meaning
==== =======================================================
0    sigma = I, b = 0                     ("linear")
1    sigma = diag(1 + 0.5 sin u_k), b_k = 0.3 cos u_k ("trig")
2    sigma = I + 0.2 * skew sinusoid coupling, b = 0  ("mixing")
3    sigma = param * I, b = 0            (scaled identity)
4    sigma = diag(1 + 0.5 cos u_k), b = 0 (even diagonal)
-1   custom callables, numpy path only
==== =======================================================
"""

import math
import os

import numpy as np

_DISABLED = os.environ.get("SHELAB_NO_NUMBA", "0") not in ("0", "", "false")

if not _DISABLED:
    try:
        from numba import njit
        USING_NUMBA = True
    except ImportError:  # pragma: no cover
        USING_NUMBA = False
else:
    USING_NUMBA = False

if not USING_NUMBA:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


# ---------------------------------------------------------------------------
# explicit Euler update for the finite-difference scheme
# ---------------------------------------------------------------------------

@njit(cache=True)
def _euler_chunk_jit(u, noise, dt, dx, code, param, probe_idx, out):
    n, d = u.shape
    m = noise.shape[0]
    amp = math.sqrt(dt / dx)
    inv_dx2 = 1.0 / (dx * dx)
    unew = np.empty_like(u)
    for step in range(m):
        for j in range(n):
            jm = j - 1 if j > 0 else 0
            jp = j + 1 if j < n - 1 else n - 1
            for k in range(d):
                lap = (u[jp, k] - 2.0 * u[j, k] + u[jm, k]) * inv_dx2
                val = u[j, k] + dt * lap
                if code == 0:
                    val += amp * noise[step, j, k]
                elif code == 1:
                    val += dt * 0.3 * math.cos(u[j, k])
                    val += (1.0 + 0.5 * math.sin(u[j, k])) * amp * noise[step, j, k]
                elif code == 2:
                    g = amp * noise[step, j, k]
                    # adjacent-pair skew coupling: pairs (0,1), (2,3), ...
                    if k % 2 == 0 and k + 1 < d:
                        g += 0.2 * math.sin(u[j, k + 1]) * amp * noise[step, j, k + 1]
                    elif k % 2 == 1:
                        g -= 0.2 * math.sin(u[j, k - 1]) * amp * noise[step, j, k - 1]
                    val += g
                elif code == 3:
                    val += param * amp * noise[step, j, k]
                elif code == 4:
                    val += (1.0 + 0.5 * math.cos(u[j, k])) * amp * noise[step, j, k]
                unew[j, k] = val
        for j in range(n):
            for k in range(d):
                u[j, k] = unew[j, k]
        ok = True
        for k in range(d):
            out[step, k] = u[probe_idx, k]
            if not math.isfinite(u[probe_idx, k]):
                ok = False
        if not ok:
            return step
    return -1


def _euler_chunk_py(u, noise, dt, dx, code, param, probe_idx, out):
    n, d = u.shape
    m = noise.shape[0]
    amp = math.sqrt(dt / dx)
    inv_dx2 = 1.0 / (dx * dx)
    for step in range(m):
        lap = np.empty_like(u)
        lap[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
        lap[0] = u[1] - u[0]
        lap[-1] = u[-2] - u[-1]
        lap *= inv_dx2
        xi = noise[step]
        if code == 0:
            upd = amp * xi
        elif code == 1:
            upd = dt * 0.3 * np.cos(u) + (1.0 + 0.5 * np.sin(u)) * amp * xi
        elif code == 2:
            upd = amp * xi.copy()
            for k in range(0, d - 1, 2):
                upd[:, k] += 0.2 * np.sin(u[:, k + 1]) * amp * xi[:, k + 1]
                upd[:, k + 1] -= 0.2 * np.sin(u[:, k]) * amp * xi[:, k]
        elif code == 3:
            upd = param * amp * xi
        elif code == 4:
            upd = (1.0 + 0.5 * np.cos(u)) * amp * xi
        else:
            raise ValueError("unknown coefficient code")
        u += dt * lap + upd
        out[step] = u[probe_idx]
        if not np.all(np.isfinite(u[probe_idx])):
            return step
    return -1


# ---------------------------------------------------------------------------
# exact Ornstein-Uhlenbeck mode recursion for the linear (additive) system
# ---------------------------------------------------------------------------

@njit(cache=True)
def _ou_chunk_jit(modes, decay, sd, noise, weights, out):
    K, d = modes.shape
    m = noise.shape[0]
    for step in range(m):
        for k in range(d):
            acc = 0.0
            for q in range(K):
                a = decay[q] * modes[q, k] + sd[q] * noise[step, q, k]
                modes[q, k] = a
                acc += weights[q] * a
            out[step, k] = acc
    return out


def _ou_chunk_py(modes, decay, sd, noise, weights, out):
    m = noise.shape[0]
    for step in range(m):
        modes *= decay[:, None]
        modes += sd[:, None] * noise[step]
        out[step] = weights @ modes
    return out


# ---------------------------------------------------------------------------
# small-ball pair counting
# ---------------------------------------------------------------------------

@njit(cache=True)
def _pair_counts_jit(states, eps2, min_lag):
    n, d = states.shape
    ne = eps2.shape[0]
    counts = np.zeros(ne, dtype=np.int64)
    total = 0
    for i in range(n):
        for j in range(i + min_lag, n):
            s = 0.0
            for k in range(d):
                diff = states[i, k] - states[j, k]
                s += diff * diff
            total += 1
            for e in range(ne):
                if s <= eps2[e]:
                    counts[e] += 1
    return counts, total


def _pair_counts_py(states, eps2, min_lag):
    n = states.shape[0]
    counts = np.zeros(len(eps2), dtype=np.int64)
    total = 0
    for lag in range(min_lag, n):
        d2 = np.sum((states[:-lag] - states[lag:]) ** 2, axis=1)
        total += d2.size
        for e in range(len(eps2)):
            counts[e] += int(np.count_nonzero(d2 <= eps2[e]))
    return counts, total


# ---------------------------------------------------------------------------
# Fourier functional of a path on a frequency lattice
# ---------------------------------------------------------------------------

@njit(cache=True)
def _fourier_sums_jit(states, xis, dt):
    n, d = states.shape
    nf = xis.shape[0]
    out = np.empty(nf, dtype=np.complex128)
    for f in range(nf):
        re = 0.0
        im = 0.0
        for j in range(n):
            ph = 0.0
            for k in range(d):
                ph += xis[f, k] * states[j, k]
            re += math.cos(ph)
            im += math.sin(ph)
        out[f] = complex(re * dt, im * dt)
    return out


def _fourier_sums_py(states, xis, dt):
    out = np.empty(xis.shape[0], dtype=np.complex128)
    chunk = max(1, int(4e6) // max(1, states.shape[0]))
    for a in range(0, xis.shape[0], chunk):
        ph = xis[a:a + chunk] @ states.T
        out[a:a + chunk] = np.exp(1j * ph).sum(axis=1) * dt
    return out


# ---------------------------------------------------------------------------
# Gaussian kernel density estimate on a lattice
# ---------------------------------------------------------------------------

@njit(cache=True)
def _kde_lattice_jit(samples, lattice, bw):
    n, d = samples.shape
    m = lattice.shape[0]
    out = np.zeros(m)
    norm = 1.0 / (n * (bw * math.sqrt(2.0 * math.pi)) ** d)
    inv2 = 1.0 / (2.0 * bw * bw)
    for i in range(m):
        acc = 0.0
        for j in range(n):
            s = 0.0
            for k in range(d):
                diff = lattice[i, k] - samples[j, k]
                s += diff * diff
            acc += math.exp(-s * inv2)
        out[i] = acc * norm
    return out


def _kde_lattice_py(samples, lattice, bw):
    n, d = samples.shape
    norm = 1.0 / (n * (bw * math.sqrt(2.0 * math.pi)) ** d)
    inv2 = 1.0 / (2.0 * bw * bw)
    out = np.zeros(lattice.shape[0])
    chunk = max(1, int(4e6) // max(1, n))
    for a in range(0, lattice.shape[0], chunk):
        d2 = np.sum((lattice[a:a + chunk, None, :] - samples[None, :, :]) ** 2, axis=2)
        out[a:a + chunk] = np.exp(-d2 * inv2).sum(axis=1) * norm
    return out


if USING_NUMBA:
    euler_chunk = _euler_chunk_jit
    ou_chunk = _ou_chunk_jit
    pair_counts = _pair_counts_jit
    fourier_sums = _fourier_sums_jit
    kde_lattice = _kde_lattice_jit
else:
    euler_chunk = _euler_chunk_py
    ou_chunk = _ou_chunk_py
    pair_counts = _pair_counts_py
    fourier_sums = _fourier_sums_py
    kde_lattice = _kde_lattice_py
