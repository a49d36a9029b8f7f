"""Periodic grids, discrete Fourier calculus and Sobolev norms.

Functions on ``[-P/2, P/2)`` are stored as samples on the uniform grid
``x_k = P k / n`` for ``k = -n/2, ..., n/2 - 1`` (array slot ``k + n/2``).
All continuum quantities use midpoint quadrature, so for example

    <f, g>_{L2} ~ (P/n) sum_j f_j g_j.

Fourier coefficients approximate ``P^{-1} int f(x) exp(-2 pi i k x / P) dx``
and are computed as ``(1/n) DFT`` of the samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "PeriodicGrid",
    "GridFunction",
    "Spectrum",
    "periodic_fourier",
    "inverse_periodic_fourier",
    "sobolev_norm",
    "dual_sobolev_norm",
    "sobolev_inner",
    "riesz_map",
    "l2_inner",
    "l2_norm",
    "l1_norm",
    "sup_norm",
    "apply_multiplier",
]


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid with ``n`` points on one period of length ``period``."""

    n: int = 1024
    period: float = 2.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4 or self.n % 2:
            raise ValueError(f"grid size must be an even integer >= 4, got {self.n}")
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "period", float(self.period))

    @property
    def spacing(self) -> float:
        return self.period / self.n

    @cached_property
    def indices(self) -> np.ndarray:
        """Integer grid indices ``-n/2, ..., n/2 - 1``."""
        return np.arange(-self.n // 2, self.n // 2)

    @cached_property
    def points(self) -> np.ndarray:
        return self.period * self.indices / self.n

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Frequencies of ``Spectrum.coeffs``, ordered like ``indices``."""
        return self.indices.copy()

    @cached_property
    def rfft_frequencies(self) -> np.ndarray:
        """Nonnegative frequencies ``0..n/2`` matching ``numpy.fft.rfft``."""
        return np.arange(self.n // 2 + 1, dtype=float)

    @cached_property
    def rfft_multiplicity(self) -> np.ndarray:
        # each interior rfft bin stands for the pair +-k
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = w[-1] = 1.0
        return w

    def sobolev_symbol(self, t: float) -> np.ndarray:
        """``(1 + k^2)^t`` on the rfft frequencies."""
        return (1.0 + self.rfft_frequencies**2) ** t


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples of a ``period``-periodic function on ``grid``."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function has non-finite samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: PeriodicGrid, func) -> "GridFunction":
        return cls(grid, func(grid.points))

    @classmethod
    def zeros(cls, grid: PeriodicGrid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n))

    def _check(self, other: "GridFunction") -> None:
        if other.grid != self.grid:
            raise ValueError("grid functions live on different grids")

    def __add__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, c):
        return GridFunction(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return GridFunction(self.grid, self.values / float(c))

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __repr__(self):
        return f"GridFunction(n={self.grid.n}, max|f|={np.max(np.abs(self.values)):.4g})"


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Periodic Fourier coefficients ordered by ``k = -n/2, ..., n/2 - 1``."""

    grid: PeriodicGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def __getitem__(self, k: int) -> complex:
        n = self.grid.n
        return self.coeffs[(int(k) + n // 2) % n]


def periodic_fourier(f: GridFunction) -> Spectrum:
    n = f.grid.n
    # ifftshift puts x = 0 into slot 0 so the DFT phase matches x_k = P k / n
    c = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(f.values))) / n
    return Spectrum(f.grid, c)


def inverse_periodic_fourier(s: Spectrum, atol: float = 1e-10) -> GridFunction:
    n = s.grid.n
    v = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(s.coeffs))) * n
    scale = max(1.0, float(np.max(np.abs(v))))
    if np.max(np.abs(v.imag)) > atol * scale:
        raise ValueError(
            "spectrum is not conjugate symmetric: inverse transform has an "
            f"imaginary part of size {np.max(np.abs(v.imag)):.3g}"
        )
    return GridFunction(s.grid, v.real)


def apply_multiplier(values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    """Apply a real even Fourier multiplier given on the rfft frequencies.

    Works on the last axis, so batches of sample vectors are accepted.
    """
    n = values.shape[-1]
    return np.fft.irfft(np.fft.rfft(values, axis=-1) * symbol, n, axis=-1)


def _weighted_sq_norm(values: np.ndarray, grid: PeriodicGrid, t: float) -> np.ndarray:
    c = np.fft.rfft(values, axis=-1) / grid.n
    w = grid.rfft_multiplicity * grid.sobolev_symbol(t)
    return grid.period * np.sum(w * (c.real**2 + c.imag**2), axis=-1)


def sobolev_norm(f: GridFunction, t: float) -> float:
    """``P^{1/2} (sum_k (1 + k^2)^t |f_hat(k)|^2)^{1/2}`` over the grid frequencies."""
    if t < 0:
        raise ValueError(f"Sobolev index must be nonnegative, got {t}")
    return float(np.sqrt(_weighted_sq_norm(f.values, f.grid, t)))


def dual_sobolev_norm(f: GridFunction, t: float) -> float:
    """Norm of ``f`` in ``H^{-t}``, the dual of ``H^t`` under the L2 pairing."""
    if t < 0:
        raise ValueError(f"Sobolev index must be nonnegative, got {t}")
    return float(np.sqrt(_weighted_sq_norm(f.values, f.grid, -t)))


def sobolev_inner(f: GridFunction, g: GridFunction, t: float) -> float:
    f._check(g)
    grid = f.grid
    cf = np.fft.rfft(f.values) / grid.n
    cg = np.fft.rfft(g.values) / grid.n
    w = grid.rfft_multiplicity * grid.sobolev_symbol(t)
    return float(grid.period * np.sum(w * (cf * np.conj(cg)).real))


def riesz_map(y: GridFunction, t: float) -> GridFunction:
    """Riesz isomorphism ``H^{-t} -> H^t``: multiply coefficients by ``(1+k^2)^{-t}``."""
    if t == 0:
        return y
    return GridFunction(y.grid, apply_multiplier(y.values, y.grid.sobolev_symbol(-t)))


def l2_inner(f: GridFunction, g: GridFunction) -> float:
    f._check(g)
    return float(f.grid.spacing * np.dot(f.values, g.values))


def l2_norm(f: GridFunction) -> float:
    return float(np.sqrt(f.grid.spacing) * np.linalg.norm(f.values))


def l1_norm(f: GridFunction) -> float:
    return float(f.grid.spacing * np.sum(np.abs(f.values)))


def sup_norm(f: GridFunction) -> float:
    return float(np.max(np.abs(f.values)))
