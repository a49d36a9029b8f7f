"""Power-versus-noise sweeps and their CSV / SVG output.

For every noise level the sweep reports

* ``unregularized``: exact power of the unregularized test,
* ``oracle``: exact power of the probe minimizing ``J^{L2}_{Tu}``,
* ``plugin:<beta>``: exact power of Tikhonov plug-in probes (optional),
* ``adaptive``: Monte-Carlo power of the two-sample test.

The adaptive test spends two samples, so the single-sample tests are
evaluated at ``sigma / sqrt(2)`` to compare at equal total information.
Every sigma reuses the same noise draws, which keeps the adaptive curve
smooth in sigma.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, fields
from typing import Iterable, Mapping, Optional, Sequence, TextIO

import numpy as np

from regtest.adaptive import draw_pair, empirical_power
from regtest.operator import forward, plugin_probe, unregularized_probe
from regtest.optim import PdpsConfig, pdps_solve, recover_probe
from regtest.scenario import Scenario, feature_functional, truth
from regtest.spectral import PeriodicGrid
from regtest.testing import exact_power, unregularized_power

__all__ = [
    "ConfigError",
    "OutputError",
    "ExperimentConfig",
    "PowerRecord",
    "CSV_COLUMNS",
    "default_sigma_grid",
    "run_experiment",
    "emit_csv",
    "read_csv",
    "emit_plot",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = ("scenario", "test", "a", "l", "lambda", "t", "sigma", "power", "se", "no_min_count")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class OutputError(OSError):
    pass


def default_sigma_grid(sigma_min: float = 1e-6, sigma_max: float = 1.0, points: int = 25) -> tuple:
    """Log-spaced noise levels, largest first."""
    if not 0 < sigma_min <= sigma_max:
        raise ConfigError("sigma_min", f"need 0 < sigma_min <= sigma_max, got {sigma_min}, {sigma_max}")
    if int(points) != points or points < 1:
        raise ConfigError("sigma_points", f"must be a positive integer, got {points}")
    if points == 1:
        return (float(sigma_max),)
    return tuple(float(s) for s in np.logspace(math.log10(sigma_max), math.log10(sigma_min), int(points)))


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "s1"
    a: float = 2.0
    l: float = 5 / 128
    lam: float = 1.0
    t: float = 0.51
    alpha: float = 0.1
    sigma_grid: tuple = field(default_factory=default_sigma_grid)
    M: int = 100
    plugin_betas: tuple = ()
    seed: int = 0
    n: int = 1024
    solver: PdpsConfig = field(default_factory=PdpsConfig)
    out_csv: Optional[str] = None
    out_svg: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "sigma_grid", tuple(float(s) for s in self.sigma_grid))
        object.__setattr__(self, "plugin_betas", tuple(float(b) for b in self.plugin_betas))
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha", f"must lie in (0, 1), got {self.alpha}")
        if not self.sigma_grid:
            raise ConfigError("sigma_grid", "must not be empty")
        if any(not s > 0 for s in self.sigma_grid):
            raise ConfigError("sigma_grid", "noise levels must be positive")
        if any(b >= a for a, b in zip(self.sigma_grid, self.sigma_grid[1:])):
            raise ConfigError("sigma_grid", "must be strictly decreasing")
        if int(self.M) != self.M or self.M < 1:
            raise ConfigError("M", f"must be a positive integer, got {self.M}")
        if any(not b > 0 for b in self.plugin_betas):
            raise ConfigError("plugin_betas", "regularization parameters must be positive")
        try:
            self.scenario_obj()
        except ValueError as exc:
            raise ConfigError("scenario", str(exc)) from None
        try:
            PeriodicGrid(self.n)
        except ValueError as exc:
            raise ConfigError("n", str(exc)) from None

    def scenario_obj(self) -> Scenario:
        return Scenario(self.scenario, self.a, self.l, self.lam, self.t)

    def header(self) -> dict:
        """Every setting as ordered ``key -> text`` pairs for the CSV run header."""
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ("solver", "sigma_grid")}
        out["sigma_grid"] = " ".join(f"{s:.9g}" for s in self.sigma_grid)
        out["plugin_betas"] = " ".join(f"{b:.9g}" for b in self.plugin_betas)
        for f in fields(self.solver):
            out[f"solver_{f.name}"] = getattr(self.solver, f.name)
        return {k: ("" if v is None else str(v)) for k, v in out.items()}


@dataclass(frozen=True)
class PowerRecord:
    scenario: str
    test: str
    a: float
    l: float
    lam: float
    t: float
    sigma: float
    power: float
    se: float = 0.0
    no_min_count: int = 0
    not_converged: int = field(default=0, compare=False)

    def __post_init__(self):
        if not (0.0 <= self.power <= 1.0 or math.isnan(self.power)):
            raise ValueError(f"power must lie in [0, 1], got {self.power}")


def _plugin_label(beta: float) -> str:
    return f"plugin:{beta:g}"


def run_experiment(cfg: ExperimentConfig, trace: Optional[TextIO] = None) -> list:
    """Sweep ``cfg.sigma_grid`` and return records in output order.

    ``trace`` receives the per-iteration solver log of the oracle solve and of
    the first adaptive design sample at each sigma.
    """
    sc = cfg.scenario_obj()
    grid = PeriodicGrid(cfg.n)
    ks = sc.kernel
    phi = feature_functional(sc, grid)
    u = truth(sc, grid)
    clean = forward(u, ks)

    if trace is not None:
        trace.write("# solve: oracle\n")
    orep = pdps_solve(clean, phi, ks, 0.0, cfg.solver, trace=trace)
    if orep.minimizer_found:
        oracle, oracle_nomin = recover_probe(orep), 0
    else:
        log.warning("oracle solve ended with status %s; falling back to the unregularized probe", orep.status)
        oracle, oracle_nomin = unregularized_probe(phi, ks), 1
    plugins = [(b, plugin_probe(phi, ks, b)) for b in cfg.plugin_betas]

    base = dict(scenario=sc.kind, a=sc.a, l=sc.l, lam=sc.lam, t=sc.t)
    records = []
    for sigma in cfg.sigma_grid:
        s1 = sigma / math.sqrt(2.0)
        p_unreg = unregularized_power(phi, u, s1, cfg.alpha, ks)
        p_oracle = exact_power(oracle, phi, u, s1, cfg.alpha, ks)
        records.append(PowerRecord(test="unregularized", sigma=sigma, power=p_unreg, **base))
        records.append(PowerRecord(test="oracle", sigma=sigma, power=p_oracle, no_min_count=oracle_nomin, **base))
        for beta, probe in plugins:
            records.append(PowerRecord(test=_plugin_label(beta), sigma=sigma,
                                       power=exact_power(probe, phi, u, s1, cfg.alpha, ks), **base))
        if trace is not None:
            trace.write(f"# solve: adaptive design sample 0, sigma={sigma:.9g}\n")
            y1, _ = draw_pair(sc, sigma, cfg.seed, 0, grid)
            pdps_solve(y1, phi, ks, sc.t, cfg.solver, trace=trace)
        est = empirical_power(sc, sigma, cfg.alpha, cfg.M, cfg.solver, cfg.seed, grid)
        records.append(PowerRecord(test="adaptive", sigma=sigma, power=est.power, se=est.se,
                                   no_min_count=est.no_min_count, not_converged=est.not_converged, **base))
        log.info("sigma=%.3g unregularized=%.4f oracle=%.4f adaptive=%.4f (no minimizer %d, unconverged %d)",
                 sigma, p_unreg, p_oracle, est.power, est.no_min_count, est.not_converged)
    return sort_records(records)


def sort_records(records: Iterable[PowerRecord]) -> list:
    return sorted(records, key=lambda r: (-r.sigma, r.test))


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _write_csv(records: Sequence[PowerRecord], fh: TextIO, header: Optional[Mapping[str, str]]) -> None:
    for key, value in (header or {}).items():
        fh.write(f"# {key}: {value}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in sort_records(records):
        w.writerow([r.scenario, r.test, _fmt(r.a), _fmt(r.l), _fmt(r.lam), _fmt(r.t), _fmt(r.sigma),
                    _fmt(r.power), _fmt(r.se), r.no_min_count])


def emit_csv(records: Sequence[PowerRecord], path, header: Optional[Mapping[str, str]] = None) -> None:
    """Write records sorted by sigma (descending) then test name.

    ``header`` entries become leading ``# key: value`` comment lines.
    """
    try:
        with open(path, "w", newline="") as fh:
            _write_csv(records, fh, header)
    except OSError as exc:
        raise OutputError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc


def read_csv(path) -> list:
    try:
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
    except OSError as exc:
        raise OutputError(f"cannot read CSV from {path}: {exc.strerror or exc}") from exc
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected CSV header {reader.fieldnames}")
    return [
        PowerRecord(row["scenario"], row["test"], float(row["a"]), float(row["l"]), float(row["lambda"]),
                    float(row["t"]), float(row["sigma"]), float(row["power"]), float(row["se"]),
                    int(row["no_min_count"]))
        for row in reader
    ]


_STYLE = {
    "unregularized": dict(color="tab:blue", linestyle="--"),
    "oracle": dict(color="tab:green", linestyle="-"),
    "adaptive": dict(color="tab:red", linestyle="-", marker="o", markersize=3),
}


def emit_plot(records: Sequence[PowerRecord], path, alpha: float = 0.1, title: Optional[str] = None,
              description: Optional[str] = None) -> None:
    """Static SVG of power against log sigma, one curve per test.

    Each curve's SVG group has id ``curve-<test>``; ``description`` goes into
    the SVG metadata.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "regtest", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        try:
            tests = sorted({r.test for r in records})
            for name in tests:
                rows = sorted((r for r in records if r.test == name), key=lambda r: r.sigma)
                style = _STYLE.get(name, dict(linestyle=":"))
                ax.plot([r.sigma for r in rows], [r.power for r in rows], label=name, gid=f"curve-{name}", **style)
            ax.axhline(alpha, color="0.5", linewidth=0.8, gid="alpha-level")
            ax.set_xscale("log")
            if not records:
                ax.set_xlim(1e-6, 1.0)
            ax.set_ylim(0.0, 1.0)
            ax.set_xlabel("noise level sigma")
            ax.set_ylabel("power")
            if title:
                ax.set_title(title)
            if tests:
                ax.legend(loc="lower left", fontsize="small")
            fig.tight_layout()
            meta = {"Date": None}
            if description:
                meta["Description"] = description
            fig.savefig(path, format="svg", metadata=meta)
        except OSError as exc:
            raise OutputError(f"cannot write SVG to {path}: {exc.strerror or exc}") from exc
        finally:
            plt.close(fig)
