"""Command-line entry point ``regtest``.

Settings come from built-in defaults, then an optional flat YAML file
(``--config``), then command-line flags; later sources win.  Exit status is
0 on success, 1 for configuration errors and 2 for I/O errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from typing import Optional, Sequence

import yaml

from regtest.experiment import (
    ConfigError,
    ExperimentConfig,
    OutputError,
    default_sigma_grid,
    emit_csv,
    emit_plot,
    run_experiment,
)
from regtest.optim import PdpsConfig

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2

DEFAULTS = {
    "scenario": "s1",
    "a": 2.0,
    "l": "5/128",
    "lambda": 1.0,
    "t": 0.51,
    "alpha": 0.1,
    "sigma_min": 1e-6,
    "sigma_max": 1.0,
    "sigma_points": 25,
    "samples": 100,
    "seed": 0,
    "plugin_betas": [],
    "n": 1024,
    "max_iter": PdpsConfig.max_iter,
    "tol": PdpsConfig.tol,
    "out_csv": "power.csv",
    "out_svg": None,
}


def rational(text) -> float:
    """Parse ``5/128``, ``0.039`` or a number."""
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="regtest",
        description="Power of regularized tests for a linear feature under periodic deconvolution.",
    )
    S = argparse.SUPPRESS
    p.add_argument("--config", metavar="PATH", help="flat YAML file with any of the settings below")
    p.add_argument("--scenario", choices=("s1", "s2", "s3"), default=S, help="built-in scenario (default s1)")
    p.add_argument("--a", type=float, default=S, help="kernel order (default 2)")
    p.add_argument("--l", type=rational, default=S, help="support length, e.g. 5/128 (default 5/128)")
    p.add_argument("--lambda", dest="lambda", type=float, default=S, help="support overlap in [0, 1] (default 1)")
    p.add_argument("--t", type=float, default=S, help="Sobolev index of the adaptive test (default 0.51)")
    p.add_argument("--alpha", type=float, default=S, help="test level (default 0.1)")
    p.add_argument("--sigma-min", type=float, default=S, help="smallest noise level (default 1e-6)")
    p.add_argument("--sigma-max", type=float, default=S, help="largest noise level (default 1)")
    p.add_argument("--sigma-points", type=int, default=S, help="number of noise levels (default 25)")
    p.add_argument("--samples", type=int, default=S, metavar="M", help="Monte-Carlo samples per level (default 100)")
    p.add_argument("--seed", type=int, default=S, help="RNG seed (default 0)")
    p.add_argument("--plugin-betas", type=float, nargs="*", default=S, metavar="BETA",
                   help="also report Tikhonov plug-in tests with these parameters")
    p.add_argument("--n", type=int, default=S, help="grid size (default 1024)")
    p.add_argument("--max-iter", type=int, default=S, help="solver iteration cap (default 20000)")
    p.add_argument("--tol", type=float, default=S, help="solver relative-change tolerance (default 1e-5)")
    p.add_argument("--out-csv", default=S, metavar="PATH", help="CSV output (default power.csv)")
    p.add_argument("--out-svg", default=S, metavar="PATH", help="optional SVG plot")
    p.add_argument("--debug-solver", nargs="?", const="-", default=None, metavar="PATH",
                   help="write per-iteration solver diagnostics as CSV (stderr if no PATH)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress per noise level")
    return p


def load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"{path} is not valid YAML: {exc}") from None
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path} must hold a flat key-value mapping")
    out = {}
    for key, value in data.items():
        norm = str(key).replace("-", "_")
        if norm not in DEFAULTS:
            raise ConfigError(str(key), "unknown setting")
        if isinstance(value, (dict, list)) and norm != "plugin_betas":
            raise ConfigError(str(key), "nested values are not supported")
        out[norm] = value
    return out


def _number(settings: dict, key: str, kind=float):
    value = settings[key]
    try:
        if kind is int:
            if isinstance(value, bool) or int(value) != float(value):
                raise ValueError
            return int(value)
        return kind(value)
    except (TypeError, ValueError, argparse.ArgumentTypeError):
        raise ConfigError(key, f"invalid value {value!r}") from None


def resolve_settings(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    if args.config:
        settings.update(load_config_file(args.config))
    for key in DEFAULTS:
        if key in vars(args):
            settings[key] = vars(args)[key]
    return settings


def make_config(settings: dict) -> ExperimentConfig:
    try:
        solver = PdpsConfig(max_iter=_number(settings, "max_iter", int), tol=_number(settings, "tol"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("solver", str(exc)) from None
    betas = settings["plugin_betas"] or []
    if not isinstance(betas, (list, tuple)):
        betas = [betas]
    return ExperimentConfig(
        scenario=str(settings["scenario"]).lower(),
        a=_number(settings, "a"),
        l=_number(settings, "l", rational),
        lam=_number(settings, "lambda"),
        t=_number(settings, "t"),
        alpha=_number(settings, "alpha"),
        sigma_grid=default_sigma_grid(_number(settings, "sigma_min"), _number(settings, "sigma_max"),
                                      _number(settings, "sigma_points", int)),
        M=_number(settings, "samples", int),
        plugin_betas=tuple(float(b) for b in betas),
        seed=_number(settings, "seed", int),
        n=_number(settings, "n", int),
        solver=solver,
        out_csv=settings["out_csv"],
        out_svg=settings["out_svg"],
    )


def _open_trace(target: Optional[str]):
    if target is None:
        return None, False
    if target == "-":
        return sys.stderr, False
    try:
        return open(target, "w"), True
    except OSError as exc:
        raise OutputError(f"cannot write solver trace to {target}: {exc.strerror or exc}") from exc


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        settings = resolve_settings(args)
        cfg = make_config(settings)
    except ConfigError as exc:
        print(f"regtest: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"regtest: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        trace, owned = _open_trace(args.debug_solver)
        try:
            records = run_experiment(cfg, trace=trace)
        finally:
            if owned:
                trace.close()
        header = cfg.header()
        header["not_converged_total"] = str(sum(r.not_converged for r in records))
        if cfg.out_csv:
            emit_csv(records, cfg.out_csv, header)
        if cfg.out_svg:
            emit_plot(records, cfg.out_svg, alpha=cfg.alpha,
                      title=f"{cfg.scenario.upper()}  a={cfg.a:g}  l={cfg.l:.6g}  lambda={cfg.lam:g}",
                      description="; ".join(f"{k}={v}" for k, v in header.items()))
    except OutputError as exc:
        print(f"regtest: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
