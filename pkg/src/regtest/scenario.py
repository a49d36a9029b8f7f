"""Support-inference scenarios built from symmetric beta kernels.

The feature functional ``phi`` is a beta kernel on ``[0, l]`` scaled to unit
L2 norm; the truth ``u`` is a beta kernel on ``[(1-lam) l, (2-lam) l]``
scaled to unit L1 norm (a probability density).  Three built-in scenarios
fix the shape exponents:

====  ===============================  ==========  =====
kind  name                             beta        gamma
====  ===============================  ==========  =====
s1    compatible smooth                1 + 2a      2
s2    compatible nonsmooth             1 + 2a      1
s3    incompatible smooth              1           2
====  ===============================  ==========  =====
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from regtest.operator import KernelSpec
from regtest.spectral import GridFunction, PeriodicGrid, l1_norm, l2_inner, l2_norm

__all__ = ["Scenario", "SCENARIO_NAMES", "beta_kernel", "feature_functional", "truth", "feature_value"]

SCENARIO_NAMES = {
    "s1": "compatible-smooth",
    "s2": "compatible-nonsmooth",
    "s3": "incompatible-smooth",
}


@dataclass(frozen=True)
class Scenario:
    """One testing problem: kernel order ``a``, support length ``l``, overlap ``lam``.

    ``t`` is the Sobolev index of the space the adaptive test optimizes over.
    """

    kind: str = "s1"
    a: float = 2.0
    l: float = 5 / 128
    lam: float = 1.0
    t: float = 0.51
    b: float = 0.06

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in SCENARIO_NAMES:
            raise ValueError(f"unknown scenario {self.kind!r}; expected one of s1, s2, s3")
        object.__setattr__(self, "kind", kind)
        if not 0 < self.l < 1:
            raise ValueError(f"support length l must lie in (0, 1), got {self.l}")
        if not 0 <= self.lam <= 1:
            raise ValueError(f"overlap lambda must lie in [0, 1], got {self.lam}")
        if (2 - self.lam) * self.l > 0.5:
            raise ValueError("truth support must stay inside [-1/2, 1/2]")
        if not self.t >= 0:
            raise ValueError(f"Sobolev index t must be nonnegative, got {self.t}")
        KernelSpec(self.a, self.b)

    @property
    def beta(self) -> float:
        return 1.0 if self.kind == "s3" else 1.0 + 2.0 * self.a

    @property
    def gamma(self) -> float:
        return 1.0 if self.kind == "s2" else 2.0

    @property
    def kernel(self) -> KernelSpec:
        return KernelSpec(self.a, self.b)

    @property
    def name(self) -> str:
        return SCENARIO_NAMES[self.kind]


def beta_kernel(x: np.ndarray, l: float, shape: float, start: float = 0.0, tol: float = 1e-9) -> np.ndarray:
    """Unnormalized ``z^(shape-1) (l-z)^(shape-1)`` on ``z = x - start`` in ``[0, l]``."""
    if not shape >= 1:
        raise ValueError(f"kernel shape must be >= 1, got {shape}")
    z = np.asarray(x, dtype=float) - start
    inside = (z >= -tol * l) & (z <= l * (1 + tol))
    zc = np.clip(z, 0.0, l)
    vals = (zc * (l - zc)) ** (shape - 1.0)
    return np.where(inside, vals, 0.0)


def feature_functional(s: Scenario, grid: PeriodicGrid) -> GridFunction:
    phi = GridFunction(grid, beta_kernel(grid.points, s.l, s.beta))
    return phi / l2_norm(phi)


def truth(s: Scenario, grid: PeriodicGrid) -> GridFunction:
    # the support start is snapped to the grid so the truth is an exact
    # grid shift of the lam = 1 density
    start = grid.spacing * round((1 - s.lam) * s.l / grid.spacing)
    u = GridFunction(grid, beta_kernel(grid.points, s.l, s.gamma, start))
    return u / l1_norm(u)


def feature_value(phi: GridFunction, u: GridFunction) -> float:
    """Feature size in the normalized discrete convention.

    With ``phi~ = sqrt(h) phi`` (unit Euclidean norm) and ``u~ = h u`` (unit
    l1 norm), ``h = P/n``, this returns ``sum_j phi~_j u~_j``, which equals
    ``sqrt(h) * <phi, u>_{L2}``.
    """
    return float(np.sqrt(phi.grid.spacing) * l2_inner(phi, u))
