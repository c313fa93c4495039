"""Probe-point trajectories and their on-disk formats."""

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .grids import SeedSpec

_MAGIC = b"OCPA"
_VERSION = 1


@dataclass(frozen=True)
class PathSample:
    """One realization of t -> u(t, x*) on the time grid.

    ``states`` has shape (n_time + 1, d); row 0 is the zero initial state.
    """

    times: np.ndarray
    states: np.ndarray
    seed: SeedSpec
    coeff_tag: str = "linear"

    def __post_init__(self):
        if self.states.ndim != 2 or self.states.shape[0] != self.times.shape[0]:
            raise ValueError("states must be (n_times, d)")
        if not np.all(self.states[0] == 0.0):
            raise ValueError("initial state must be zero")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("non-finite state in path")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def dump_binary(path: PathSample, filename) -> None:
    """Little-endian dump: magic, version u32, n_time u64, d u32, seed u64,
    then row-major float64 states."""
    n_time = path.states.shape[0] - 1
    with open(filename, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IQIQ", _VERSION, n_time, path.dim, path.seed.base_seed))
        fh.write(path.states.astype("<f8").tobytes())


def load_binary(filename) -> tuple[np.ndarray, int]:
    """Returns (states, base_seed); times must be reconstructed by the caller."""
    with open(filename, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{filename}: bad magic")
        version, n_time, d, seed = struct.unpack("<IQIQ", fh.read(24))
        if version != _VERSION:
            raise ValueError(f"{filename}: unsupported version {version}")
        states = np.frombuffer(fh.read(), dtype="<f8").reshape(n_time + 1, d)
    return states, seed


def dump_csv(path: PathSample, filename) -> None:
    with open(filename, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time"] + [f"u_{k + 1}" for k in range(path.dim)])
        for t, row in zip(path.times, path.states):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def load_csv(filename) -> tuple[np.ndarray, np.ndarray]:
    with open(filename, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[0] != "time":
            raise ValueError(f"{filename}: unexpected header {header}")
        rows = [[float(v) for v in row] for row in reader]
    arr = np.asarray(rows)
    return arr[:, 0], arr[:, 1:]
