"""Convex surrogate of the power functional and its primal-dual solver.

Minimizing ``J_y(Phi) = (||T* Phi - phi||_inf - <y, Phi>) / ||Phi||_{H^t}`` is
nonconvex, but after the substitution ``e = Phi / ||Phi||``, ``s = 1 / ||Phi||``
it becomes the convex program

    min  J^(e, s) = ||T* e - s phi||_inf - <y, e>
    s.t. ||e||_{H^t} <= 1,  s >= 0.

Writing ``K(e, s) = T* e - s phi`` and ``G = ||.||_inf`` the problem is
``F(x) + G(K x)`` with ``F`` the linear term plus the indicator of the
feasible set, which is solved by primal-dual proximal splitting.  ``G*`` is
the indicator of the L1 unit ball, so its prox is a Euclidean projection; in
grid coordinates the L1 unit ball under quadrature is the l1 ball of radius
``n / P``.

The batched solver keeps ``e`` as its rfft coefficients so each iteration
costs one forward and one inverse FFT per row.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, TextIO

import numpy as np

from regtest.operator import KernelSpec, adjoint, forward, kernel_symbol, unregularized_probe
from regtest.spectral import GridFunction, PeriodicGrid, l2_inner, riesz_map, sobolev_norm

__all__ = [
    "ProbePair",
    "PdpsConfig",
    "SolveReport",
    "surrogate_objective",
    "apply_K",
    "apply_K_star",
    "proj_l1_ball",
    "prox_F",
    "initial_pair",
    "pdps_solve",
    "pdps_solve_batch",
    "recover_probe",
    "operator_norm_estimate",
    "TRACE_HEADER",
]

TRACE_HEADER = ("iteration", "objective", "e_norm", "s")


@dataclass(frozen=True)
class ProbePair:
    e: GridFunction
    s: float


@dataclass(frozen=True)
class PdpsConfig:
    """Step sizes and stopping rule.

    ``tol`` bounds the relative change ``||x+ - x|| / (1 + ||x||)`` in the
    ``H^t x R`` norm.  The change decays roughly like ``1/k``, so tolerances
    much below ``1e-6`` are not reachable in a practical number of steps.
    """

    tau: float = 0.25
    rho: float = 0.25
    max_iter: int = 20000
    tol: float = 1e-5
    s_floor: float = 1e-8

    def __post_init__(self):
        if not (self.tau > 0 and self.rho > 0):
            raise ValueError("step sizes tau and rho must be positive")
        # ||K|| <= 2, so tau rho ||K||^2 < 1 is implied by tau rho 4 < 1
        if not self.tau * self.rho * 4 < 1:
            raise ValueError(f"tau*rho*4 must be < 1, got {self.tau * self.rho * 4}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if not self.s_floor > 0:
            raise ValueError(f"s_floor must be positive, got {self.s_floor}")
        object.__setattr__(self, "max_iter", int(self.max_iter))


@dataclass(frozen=True)
class SolveReport:
    """Solver outcome.

    ``status`` is ``"minimizer"``, ``"no_minimizer"`` (converged with ``s``
    collapsed below ``s_floor * max(1, ||e||)``) or ``"not_converged"``
    (``max_iter`` reached first).
    """

    pair: ProbePair
    objective: float
    iterations: int
    converged: bool
    minimizer_found: bool
    status: str


def surrogate_objective(p: ProbePair, phi: GridFunction, y: GridFunction, ks: KernelSpec) -> float:
    resid = adjoint(p.e, ks).values - p.s * phi.values
    return float(np.max(np.abs(resid))) - l2_inner(y, p.e)


def apply_K(p: ProbePair, phi: GridFunction, ks: KernelSpec) -> GridFunction:
    return adjoint(p.e, ks) - p.s * phi


def apply_K_star(r: GridFunction, phi: GridFunction, ks: KernelSpec, t: float) -> ProbePair:
    """Adjoint of ``K`` for the ``H^t x R`` inner product: ``(R T r, -<phi, r>)``."""
    return ProbePair(riesz_map(forward(r, ks), t), -l2_inner(phi, r))


def proj_l1_ball(v, radius: float) -> np.ndarray:
    """Euclidean projection onto ``{w : ||w||_1 <= radius}`` along the last axis.

    Exact water-filling: after sorting ``|v|`` the threshold ``theta`` solves
    ``sum max(|v_i| - theta, 0) = radius``.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    v = np.asarray(v, dtype=float)
    a = np.abs(v)
    m = v.shape[-1]
    srt = np.sort(a, axis=-1)
    cum = np.cumsum(srt, axis=-1)
    tot = cum[..., -1:]
    tail = tot - cum + srt  # sum of the entries >= srt[i]
    active = srt * (m - np.arange(m)) > tail - radius
    count = np.count_nonzero(active, axis=-1)[..., None]
    first = m - count
    theta = (np.take_along_axis(tail, first, axis=-1) - radius) / count
    theta = np.where(tot > radius, theta, 0.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def prox_F(p: ProbePair, y: GridFunction, tau: float, t: float) -> ProbePair:
    """Shift ``e`` by ``tau R y`` and project onto the feasible set."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    e = p.e + tau * riesz_map(y, t)
    nrm = sobolev_norm(e, t)
    if nrm > 1:
        e = e / nrm
    return ProbePair(e, max(float(p.s), 0.0))


def initial_pair(phi: GridFunction, ks: KernelSpec, t: float) -> ProbePair:
    """``(Phi_0, 1) / ||Phi_0||_{H^t}`` with ``Phi_0`` the unregularized probe."""
    p0 = unregularized_probe(phi, ks)
    nrm = sobolev_norm(p0, t)
    return ProbePair(p0 / nrm, 1.0 / nrm)


def recover_probe(rep: SolveReport) -> GridFunction:
    if not rep.minimizer_found:
        raise ValueError(f"no probe to recover: solver status is {rep.status!r}")
    return rep.pair.e / rep.pair.s


class _Kernel:
    """Per-problem constants of the iteration in rfft coordinates."""

    def __init__(self, phi: GridFunction, ks: KernelSpec, t: float):
        grid = phi.grid
        self.grid = grid
        self.n = grid.n
        self.phi = phi.values
        self.m = kernel_symbol(ks, grid)
        self.mu = grid.sobolev_symbol(-t)
        self.m_mu = self.m * self.mu
        self.weight = grid.rfft_multiplicity * grid.sobolev_symbol(t)
        self.radius = grid.n / grid.period

    def hnorm(self, E: np.ndarray) -> np.ndarray:
        return np.sqrt(self.grid.period * np.sum(self.weight * (E.real**2 + E.imag**2), axis=-1)) / self.n

    def objective(self, E: np.ndarray, s: np.ndarray, Y: np.ndarray) -> np.ndarray:
        resid = np.fft.irfft(E * self.m, self.n, axis=-1) - s[:, None] * self.phi
        e = np.fft.irfft(E, self.n, axis=-1)
        return np.max(np.abs(resid), axis=-1) - self.grid.spacing * np.sum(Y * e, axis=-1)


def _iterate(Y: np.ndarray, ker: _Kernel, x0: ProbePair, cfg: PdpsConfig, batch: int, trace=None):
    """Run independent solves for the rows of ``Y``.

    At most ``batch`` rows are iterated together; finished rows are retired
    and replaced from the queue so the working set stays full.
    """
    n, N = ker.n, Y.shape[0]
    tau, rho, h = cfg.tau, cfg.rho, ker.grid.spacing
    E0 = np.fft.rfft(x0.e.values)
    s0 = float(x0.s)
    r0 = np.fft.irfft(E0 * ker.m, n) - s0 * ker.phi

    out_E = np.empty((N, n // 2 + 1), dtype=complex)
    out_s = np.empty(N)
    out_it = np.zeros(N, dtype=int)
    out_conv = np.zeros(N, dtype=bool)

    rows = np.empty(0, dtype=int)
    E = np.empty((0, n // 2 + 1), dtype=complex)
    s = np.empty(0)
    r = np.empty((0, n))
    RY = np.empty((0, n // 2 + 1), dtype=complex)
    its = np.empty(0, dtype=int)
    nxt = 0

    while True:
        k = min(batch - rows.size, N - nxt)
        if k > 0:
            new = np.arange(nxt, nxt + k)
            nxt += k
            rows = np.concatenate([rows, new])
            E = np.concatenate([E, np.tile(E0, (k, 1))])
            s = np.concatenate([s, np.full(k, s0)])
            r = np.concatenate([r, np.tile(r0, (k, 1))])
            RY = np.concatenate([RY, np.fft.rfft(Y[new], axis=-1) * ker.mu])
            its = np.concatenate([its, np.zeros(k, dtype=int)])
        if rows.size == 0:
            break

        # primal step: x+ = prox_tauF(x - tau K* r)
        Rr = np.fft.rfft(r, axis=-1)
        En = E + tau * (RY - Rr * ker.m_mu)
        sn = s + tau * h * (r @ ker.phi)
        En /= np.maximum(ker.hnorm(En), 1.0)[:, None]
        np.maximum(sn, 0.0, out=sn)
        # dual step on the extrapolated point
        Eb = 2.0 * En - E
        sb = 2.0 * sn - s
        r = proj_l1_ball(r + rho * (np.fft.irfft(Eb * ker.m, n, axis=-1) - sb[:, None] * ker.phi), ker.radius)

        dx = np.sqrt(ker.hnorm(En - E) ** 2 + (sn - s) ** 2)
        change = dx / (1.0 + np.sqrt(ker.hnorm(E) ** 2 + s**2))
        E, s = En, sn
        its += 1
        if trace is not None:
            J = ker.objective(E[:1], s[:1], Y[rows[:1]])
            trace.writerow([int(its[0]), f"{J[0]:.12g}", f"{ker.hnorm(E[:1])[0]:.12g}", f"{s[0]:.12g}"])

        conv = change < cfg.tol
        done = conv | (its >= cfg.max_iter)
        if done.any():
            idx = rows[done]
            out_E[idx] = E[done]
            out_s[idx] = s[done]
            out_it[idx] = its[done]
            out_conv[idx] = conv[done]
            keep = ~done
            rows, E, s, r, RY, its = rows[keep], E[keep], s[keep], r[keep], RY[keep], its[keep]

    return out_E, out_s, out_it, out_conv


def _reports(Y, ker: _Kernel, cfg: PdpsConfig, E, s, its, conv) -> list:
    J = ker.objective(E, s, Y)
    norms = ker.hnorm(E)
    E_sp = np.fft.irfft(E, ker.n, axis=-1)
    out = []
    for i in range(Y.shape[0]):
        found = bool(conv[i] and s[i] > cfg.s_floor * max(1.0, norms[i]))
        status = "minimizer" if found else ("no_minimizer" if conv[i] else "not_converged")
        pair = ProbePair(GridFunction(ker.grid, E_sp[i]), float(s[i]))
        out.append(SolveReport(pair, float(J[i]), int(its[i]), bool(conv[i]), found, status))
    return out


def pdps_solve_batch(Y, phi: GridFunction, ks: KernelSpec, t: float, cfg: Optional[PdpsConfig] = None,
                     batch: int = 16) -> list:
    """Solve one surrogate problem per data row; rows of ``Y`` are grid samples.

    Each row is solved independently; results agree with separate
    ``pdps_solve`` calls up to floating-point rounding.
    """
    cfg = cfg or PdpsConfig()
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[-1] != phi.grid.n:
        raise ValueError(f"data rows must have {phi.grid.n} samples, got {Y.shape[-1]}")
    ker = _Kernel(phi, ks, t)
    E, s, its, conv = _iterate(Y, ker, initial_pair(phi, ks, t), cfg, max(1, int(batch)))
    return _reports(Y, ker, cfg, E, s, its, conv)


def pdps_solve(y: GridFunction, phi: GridFunction, ks: KernelSpec, t: float, cfg: Optional[PdpsConfig] = None,
               trace: Optional[TextIO] = None) -> SolveReport:
    """Minimize the surrogate for data ``y``.

    With ``trace`` set, one CSV line ``iteration,objective,e_norm,s`` is
    written to it per iteration.
    """
    y._check(phi)
    cfg = cfg or PdpsConfig()
    ker = _Kernel(phi, ks, t)
    Y = y.values[None, :]
    writer = None
    if trace is not None:
        writer = csv.writer(trace, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
    E, s, its, conv = _iterate(Y, ker, initial_pair(phi, ks, t), cfg, 1, writer)
    return _reports(Y, ker, cfg, E, s, its, conv)[0]


def operator_norm_estimate(phi: GridFunction, ks: KernelSpec, t: float, iters: int = 200, seed: int = 0) -> float:
    """Power iteration on ``K* K`` in ``H^t x R``; returns the estimate of ``||K||``."""
    grid: PeriodicGrid = phi.grid
    rng = np.random.default_rng(seed)
    x = ProbePair(GridFunction(grid, rng.standard_normal(grid.n)), float(rng.standard_normal()))
    est = 0.0
    for _ in range(iters):
        nrm = np.hypot(sobolev_norm(x.e, t), x.s)
        x = ProbePair(x.e / nrm, x.s / nrm)
        Kx = apply_K(x, phi, ks)
        est = float(np.sqrt(l2_inner(Kx, Kx)))
        x = apply_K_star(Kx, phi, ks, t)
    return est
