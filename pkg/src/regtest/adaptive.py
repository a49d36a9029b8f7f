"""Two-sample adaptive test and its Monte-Carlo power.

The probe is learned from a design sample ``Y1`` by minimizing the
empirical ``J^{H^t}_{Y1}`` and then applied, with the usual critical value,
to an independent evaluation sample ``Y2``.  If the surrogate solver finds
no minimizer the test does not reject.

Sample ``m`` of a Monte-Carlo run with seed ``seed`` draws ``Y1`` from noise
stream ``2m`` and ``Y2`` from stream ``2m + 1``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from regtest.noise import white_noise_batch
from regtest.operator import forward
from regtest.optim import PdpsConfig, SolveReport, pdps_solve, pdps_solve_batch, recover_probe
from regtest.scenario import Scenario, feature_functional, truth
from regtest.spectral import GridFunction, PeriodicGrid, sobolev_norm
from regtest.testing import (
    TestOutcome,
    j_functional,
    make_test,
    normal_cdf,
    power_from_j,
    run_test,
    std_normal_quantile,
)

__all__ = [
    "AdaptiveRun",
    "PowerEstimate",
    "RejectionRate",
    "design_stream",
    "evaluation_stream",
    "draw_pair",
    "adaptive_test",
    "empirical_power",
    "adaptive_rejection_rate",
    "adaptive_rejection_rates",
    "power_lower_bound",
]


def design_stream(m: int) -> int:
    return 2 * int(m)


def evaluation_stream(m: int) -> int:
    return 2 * int(m) + 1


@dataclass(frozen=True)
class AdaptiveRun:
    y1: GridFunction
    y2: GridFunction
    report: SolveReport
    outcome: Optional[TestOutcome]  # None when no probe was recovered

    @property
    def reject(self) -> bool:
        return bool(self.outcome is not None and self.outcome.reject)

    @property
    def status(self) -> str:
        return self.report.status


@dataclass(frozen=True)
class PowerEstimate:
    power: float
    se: float
    no_min_count: int
    not_converged: int
    samples: np.ndarray = field(repr=False)  # conditional power per usable sample


@dataclass(frozen=True)
class RejectionRate:
    rate: float
    se: float
    rejections: int
    valid: int
    no_min_count: int
    not_converged: int


def _noisy_rows(clean: GridFunction, sigma: float, seed: int, streams) -> np.ndarray:
    return clean.values + sigma * white_noise_batch(clean.grid, seed, streams)


def draw_pair(scenario: Scenario, sigma: float, seed: int, m: int = 0, grid: Optional[PeriodicGrid] = None):
    """Design and evaluation samples ``(Y1, Y2)`` of Monte-Carlo sample ``m``."""
    grid = grid or PeriodicGrid()
    clean = forward(truth(scenario, grid), scenario.kernel)
    rows = _noisy_rows(clean, sigma, seed, [design_stream(m), evaluation_stream(m)])
    return GridFunction(grid, rows[0]), GridFunction(grid, rows[1])


def adaptive_test(y1: GridFunction, y2: GridFunction, scenario: Scenario, sigma: float, alpha: float,
                  cfg: Optional[PdpsConfig] = None) -> AdaptiveRun:
    if not sigma > 0:
        raise ValueError(f"noise level must be positive, got {sigma}")
    y1._check(y2)
    phi = feature_functional(scenario, y1.grid)
    rep = pdps_solve(y1, phi, scenario.kernel, scenario.t, cfg)
    if not rep.minimizer_found:
        return AdaptiveRun(y1, y2, rep, None)
    spec = make_test(recover_probe(rep), phi, sigma, alpha, scenario.kernel, "adaptive")
    return AdaptiveRun(y1, y2, rep, run_test(y2, spec))


def _warn_unconverged(count: int, total: int, sigma: float) -> None:
    if count:
        warnings.warn(
            f"{count} of {total} solves at sigma={sigma:.3g} hit max_iter and are excluded",
            RuntimeWarning,
            stacklevel=3,
        )


def empirical_power(scenario: Scenario, sigma: float, alpha: float, M: int, cfg: Optional[PdpsConfig] = None,
                    seed: int = 0, grid: Optional[PeriodicGrid] = None, batch: int = 16) -> PowerEstimate:
    """Mean conditional power ``Q(q_alpha - J_{Tu}(Phi(Y1)) / sigma)`` over ``M`` design samples.

    Samples without a minimizer contribute power 0; samples whose solve did
    not converge are excluded and counted.
    """
    if int(M) != M or M < 1:
        raise ValueError(f"sample count M must be a positive integer, got {M}")
    if not sigma > 0:
        raise ValueError(f"noise level must be positive, got {sigma}")
    grid = grid or PeriodicGrid()
    ks = scenario.kernel
    phi = feature_functional(scenario, grid)
    clean = forward(truth(scenario, grid), ks)
    Y1 = _noisy_rows(clean, sigma, seed, [design_stream(m) for m in range(int(M))])
    reports = pdps_solve_batch(Y1, phi, ks, scenario.t, cfg, batch)

    powers, no_min, unconv = [], 0, 0
    for rep in reports:
        if rep.status == "not_converged":
            unconv += 1
        elif rep.minimizer_found:
            powers.append(power_from_j(j_functional(recover_probe(rep), phi, clean, ks), sigma, alpha))
        else:
            no_min += 1
            powers.append(0.0)
    _warn_unconverged(unconv, int(M), sigma)
    samples = np.asarray(powers, dtype=float)
    if samples.size == 0:
        return PowerEstimate(float("nan"), float("nan"), no_min, unconv, samples)
    se = float(samples.std(ddof=1) / np.sqrt(samples.size)) if samples.size > 1 else 0.0
    return PowerEstimate(float(samples.mean()), se, no_min, unconv, samples)


_RULES = ("exclude", "iterate")


def adaptive_rejection_rates(scenario: Scenario, sigma: float, alpha: float, draws: int,
                             cfg: Optional[PdpsConfig] = None, seed: int = 0,
                             grid: Optional[PeriodicGrid] = None, batch: int = 16,
                             rules: Sequence[str] = _RULES) -> dict:
    """Rejection frequencies of the two-sample test, one per unconverged-solve rule.

    All rules share the same ``draws`` design solves.  ``"exclude"`` drops
    solves that hit ``max_iter``; ``"iterate"`` tests with their final
    iterate ``e/s``.  The latter probe still depends on ``Y1`` only, so its
    level is covered by the same guarantee.
    """
    rules = tuple(rules)
    if not rules or any(r not in _RULES for r in rules):
        raise ValueError(f"rules must be drawn from {_RULES}, got {rules!r}")
    if not sigma > 0:
        raise ValueError(f"noise level must be positive, got {sigma}")
    cfg = cfg or PdpsConfig()
    grid = grid or PeriodicGrid()
    ks = scenario.kernel
    phi = feature_functional(scenario, grid)
    clean = forward(truth(scenario, grid), ks)
    Y1 = _noisy_rows(clean, sigma, seed, [design_stream(m) for m in range(draws)])
    reports = pdps_solve_batch(Y1, phi, ks, scenario.t, cfg, batch)

    counts = {r: [0, 0] for r in rules}  # rejections, valid
    no_min = unconv = 0
    for m, rep in enumerate(reports):
        active = rules
        if rep.status == "not_converged":
            unconv += 1
            active = tuple(r for r in rules if r == "iterate")
            e, s = rep.pair.e, rep.pair.s
            probe = e / s if s > cfg.s_floor * max(1.0, sobolev_norm(e, scenario.t)) else None
        elif rep.minimizer_found:
            probe = recover_probe(rep)
        else:
            no_min += 1
            probe = None
        if not active:
            continue
        reject = False
        if probe is not None:
            spec = make_test(probe, phi, sigma, alpha, ks, "adaptive")
            y2 = GridFunction(grid, _noisy_rows(clean, sigma, seed, [evaluation_stream(m)])[0])
            reject = run_test(y2, spec).reject
        for r in active:
            counts[r][0] += reject
            counts[r][1] += 1
    if "exclude" in rules:
        _warn_unconverged(unconv, draws, sigma)

    out = {}
    for r, (rej, valid) in counts.items():
        rate = rej / valid if valid else float("nan")
        se = float(np.sqrt(rate * (1 - rate) / valid)) if valid else float("nan")
        out[r] = RejectionRate(rate, se, rej, valid, no_min, unconv)
    return out


def adaptive_rejection_rate(scenario: Scenario, sigma: float, alpha: float, draws: int,
                            cfg: Optional[PdpsConfig] = None, seed: int = 0,
                            grid: Optional[PeriodicGrid] = None, batch: int = 16,
                            unconverged: str = "exclude") -> RejectionRate:
    """Rejection frequency of the full two-sample test over ``draws`` paired samples."""
    if unconverged not in _RULES:
        raise ValueError(f"unconverged must be 'exclude' or 'iterate', got {unconverged!r}")
    return adaptive_rejection_rates(scenario, sigma, alpha, draws, cfg, seed, grid, batch, (unconverged,))[unconverged]


def power_lower_bound(scenario: Scenario, sigma: float, alpha: float, cfg: Optional[PdpsConfig] = None,
                      mc_draws: int = 2000, seed: int = 12345, grid: Optional[PeriodicGrid] = None,
                      n_tau: int = 50) -> float:
    """Theoretical lower bound on the adaptive power.

    ``sup_tau Q(q_alpha + tau/sigma) P(||Z||_{H^-t} < (-min J - tau) / (2 sigma))``
    with the embedding constant of ``H^t`` into L2 equal to 1; the probability
    is estimated from ``mc_draws`` noise draws.
    """
    if not sigma > 0:
        raise ValueError(f"noise level must be positive, got {sigma}")
    grid = grid or PeriodicGrid()
    ks = scenario.kernel
    phi = feature_functional(scenario, grid)
    clean = forward(truth(scenario, grid), ks)
    rep = pdps_solve(clean, phi, ks, scenario.t, cfg)
    if not rep.minimizer_found:
        return 0.0
    min_j = j_functional(recover_probe(rep), phi, clean, ks, scenario.t)
    if min_j >= 0:
        return 0.0

    Z = white_noise_batch(grid, seed, range(int(mc_draws)))
    c = np.fft.rfft(Z, axis=-1) / grid.n
    w = grid.rfft_multiplicity * grid.sobolev_symbol(-scenario.t)
    dual = np.sort(np.sqrt(grid.period * np.sum(w * (c.real**2 + c.imag**2), axis=-1)))

    taus = np.concatenate([[0.0], np.logspace(np.log10(sigma * 1e-3), np.log10(-min_j), n_tau)])
    thresholds = (-min_j - taus) / (2.0 * sigma)
    tail = np.searchsorted(dual, thresholds, side="left") / dual.size  # P(||Z|| < thr)
    q = std_normal_quantile(alpha)
    return float(np.max(normal_cdf(q + taus / sigma) * tail))
