"""Periodic convolution with the kernel ``(F h)(xi) = (1 + b^2 xi^2)^(-a)``.

The periodized kernel acts diagonally on periodic Fourier coefficients with
multiplier ``m(k) = (F h)(k / P) = (1 + (b/P)^2 k^2)^(-a)``, so the operator
is applied spectrally and never materialized in space.  ``m`` is real and
even, hence ``T`` is self-adjoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from regtest.spectral import GridFunction, PeriodicGrid, apply_multiplier

__all__ = [
    "KernelSpec",
    "kernel_multiplier",
    "kernel_symbol",
    "forward",
    "adjoint",
    "unregularized_probe",
    "plugin_probe",
]


@dataclass(frozen=True)
class KernelSpec:
    a: float = 2.0
    b: float = 0.06

    def __post_init__(self):
        if not self.a >= 0.5:
            raise ValueError(f"kernel order a must be >= 1/2, got {self.a}")
        if not self.b > 0:
            raise ValueError(f"kernel bandwidth b must be positive, got {self.b}")


def kernel_multiplier(k, ks: KernelSpec, grid: PeriodicGrid):
    """Fourier multiplier of the periodized convolution at frequency ``k``."""
    k = np.asarray(k, dtype=float)
    m = (1.0 + (ks.b / grid.period) ** 2 * k**2) ** (-ks.a)
    return float(m) if m.ndim == 0 else m


def kernel_symbol(ks: KernelSpec, grid: PeriodicGrid) -> np.ndarray:
    """Multiplier on the rfft frequencies ``0..n/2``."""
    return kernel_multiplier(grid.rfft_frequencies, ks, grid)


def forward(u: GridFunction, ks: KernelSpec) -> GridFunction:
    return GridFunction(u.grid, apply_multiplier(u.values, kernel_symbol(ks, u.grid)))


def adjoint(v: GridFunction, ks: KernelSpec) -> GridFunction:
    # real even multiplier: T* = T
    return forward(v, ks)


def unregularized_probe(phi: GridFunction, ks: KernelSpec) -> GridFunction:
    """Exact discrete solution ``Phi_0`` of ``T* Phi_0 = phi``.

    On a finite grid the inversion always succeeds; ill-posedness shows up as
    a large norm of the result, which callers may inspect.
    """
    return GridFunction(phi.grid, apply_multiplier(phi.values, 1.0 / kernel_symbol(ks, phi.grid)))


def plugin_probe(phi: GridFunction, ks: KernelSpec, beta: float) -> GridFunction:
    """Tikhonov plug-in probe ``q_beta(T T*) T phi`` with ``q_beta(x) = 1/(x + beta)``."""
    if not beta > 0:
        raise ValueError(f"regularization parameter must be positive, got {beta}")
    m = kernel_symbol(ks, phi.grid)
    return GridFunction(phi.grid, apply_multiplier(phi.values, m / (m * m + beta)))
