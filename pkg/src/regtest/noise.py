"""Discrete Gaussian white noise and data generation.

Samples are i.i.d. ``N(0, n/P)`` so that the quadrature pairing
``<Z, g> = (P/n) sum_j z_j g_j`` has variance ``||g||_{L2}^2``.  Every draw is
addressed by ``(seed, stream)``; distinct streams are statistically
independent and the same address always reproduces the same draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from regtest.operator import KernelSpec, forward
from regtest.spectral import GridFunction, PeriodicGrid

__all__ = ["NoiseDraw", "stream_rng", "sample_white_noise", "white_noise_batch", "generate_data"]


@dataclass(frozen=True)
class NoiseDraw:
    z: GridFunction
    seed: int
    stream: int


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(stream),)))


def _noise_values(grid: PeriodicGrid, seed: int, stream: int) -> np.ndarray:
    return np.sqrt(grid.n / grid.period) * stream_rng(seed, stream).standard_normal(grid.n)


def sample_white_noise(grid: PeriodicGrid, seed: int, stream: int = 0) -> NoiseDraw:
    return NoiseDraw(GridFunction(grid, _noise_values(grid, seed, stream)), int(seed), int(stream))


def white_noise_batch(grid: PeriodicGrid, seed: int, streams) -> np.ndarray:
    """Noise for several streams stacked as rows; row ``i`` equals stream ``streams[i]``."""
    streams = list(streams)
    out = np.empty((len(streams), grid.n))
    for i, s in enumerate(streams):
        out[i] = _noise_values(grid, seed, s)
    return out


def generate_data(u: GridFunction, ks: KernelSpec, sigma: float, seed: int, stream: int = 0) -> GridFunction:
    """Observation ``Y = T u + sigma Z`` for the noise draw ``(seed, stream)``."""
    if sigma < 0:
        raise ValueError(f"noise level must be nonnegative, got {sigma}")
    clean = forward(u, ks)
    if sigma == 0:
        return clean
    return GridFunction(u.grid, clean.values + sigma * _noise_values(u.grid, seed, stream))
