"""Command-line front end.

Settings come from a flat ``key=value`` file (``--config``) overridden by
flags. Exit codes: 0 ok, 1 check failure, 2 configuration error, 3 numeric
or generation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import checks, io
from .convergence import (
    ConvergenceReport,
    MonteCarloConfig,
    RateFit,
    cauchy_diffs,
    estimate_rate,
    monte_carlo_convergence,
)
from .errors import DomainError, GenerationError, NumericError, PreconditionError
from .fbm import make_driver
from .paths import Grid
from .scheme import PRESETS, euler_run, make_preset

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

DRIVERS = ("fbm", "fbm_cholesky", "identity", "power", "sinusoid")
MAX_LEVEL = 20


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    preset: str = "linear"
    driver: str = "fbm"
    a: float = 1.0
    b0: float = 0.0
    H: float = 0.75
    T: float = 1.0
    r: float = 0.5
    theta: float = 1.0
    beta: float = 1.0
    alpha: float = 0.3
    level: int = 10
    seed: int = 1
    seeds: int = 200
    base_seed: int = 0
    n_min: int = 4
    n_max: int = 9
    out: str = "out"
    refine: int = 8
    workers: int = 1

    def validate(self) -> "RunConfig":
        if self.preset not in PRESETS:
            raise ConfigError(f"preset must be one of {PRESETS}, got {self.preset!r}")
        if self.driver not in DRIVERS:
            raise ConfigError(f"driver must be one of {DRIVERS}, got {self.driver!r}")
        if not 0.5 < self.H < 1:
            raise ConfigError(f"H must satisfy 1/2 < H < 1, got {self.H}")
        if not self.T > 0:
            raise ConfigError(f"T must be positive, got {self.T}")
        if not self.r > 0:
            raise ConfigError(f"r must be positive, got {self.r}")
        if not 0 < self.theta <= 1:
            raise ConfigError(f"theta must lie in (0, 1], got {self.theta}")
        if not 0 < self.beta <= 1:
            raise ConfigError(f"beta must lie in (0, 1], got {self.beta}")
        if not self.alpha < 0.5:
            raise ConfigError(f"alpha must satisfy alpha < 1/2, got {self.alpha}")
        if not self.alpha > 1 - self.H:
            raise ConfigError(f"alpha must satisfy alpha > 1 - H = {1 - self.H:g}, got {self.alpha}")
        if not self.alpha < min(self.theta, self.beta):
            raise ConfigError(f"alpha must satisfy alpha < min(theta, beta), got {self.alpha}")
        if not 0 <= self.level <= MAX_LEVEL:
            raise ConfigError(f"level must lie in [0, {MAX_LEVEL}], got {self.level}")
        if not 0 <= self.n_min < self.n_max <= MAX_LEVEL:
            raise ConfigError(f"need 0 <= n_min < n_max <= {MAX_LEVEL}, got {self.n_min}, {self.n_max}")
        if self.seeds < 1:
            raise ConfigError(f"seeds must be at least 1, got {self.seeds}")
        if self.refine < 1:
            raise ConfigError(f"refine must be at least 1, got {self.refine}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        return self

    def serialize(self) -> str:
        return "".join(f"{k}={_format_value(v)}\n" for k, v in asdict(self).items())


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"str": str, "float": float, "int": int}


def _format_value(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def _cast(key: str, raw: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown configuration key {key!r}")
    cast = _CASTS[_FIELD_TYPES[key]]
    try:
        return cast(raw.strip())
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw.strip()!r}") from None


def parse_config_text(text: str) -> dict:
    """``key=value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip()
        out[key] = _cast(key, raw)
    return out


def config_from_text(text: str) -> RunConfig:
    return RunConfig(**parse_config_text(text))


# flag name -> RunConfig key
_FLAGS = {
    "preset": "preset",
    "driver": "driver",
    "a": "a",
    "b0": "b0",
    "hurst": "H",
    "horizon": "T",
    "delay": "r",
    "theta": "theta",
    "beta": "beta",
    "alpha": "alpha",
    "level": "level",
    "seed": "seed",
    "seeds": "seeds",
    "base-seed": "base_seed",
    "n-min": "n_min",
    "n-max": "n_max",
    "out": "out",
    "refine": "refine",
    "workers": "workers",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value settings file")
    common.add_argument("-v", "--verbose", action="store_true")
    for flag, key in _FLAGS.items():
        # values are cast by RunConfig's field types so errors map to exit code 2
        common.add_argument(f"--{flag}", dest=key, default=None, metavar=key.upper())
    p = argparse.ArgumentParser(prog="refdelay", description="Reflected delay equations driven by fBm.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run the Euler scheme, write path.csv and meta.json")
    sub.add_parser("converge", parents=[common], help="Cauchy differences over seeds, write diffs.csv and summary.json")
    sub.add_parser("check", parents=[common], help="run the invariant suites")
    sub.add_parser("fbm", parents=[common], help="write a driver path and its sidecar")
    return p


def resolve_config(args) -> RunConfig:
    values = {}
    if args.config:
        try:
            values.update(parse_config_text(Path(args.config).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
    for key in _FLAGS.values():
        raw = getattr(args, key)
        if raw is not None:
            values[key] = _cast(key, raw)
    return RunConfig(**values).validate()


def _driver(cfg: RunConfig, level: int, seed: int):
    return make_driver(cfg.driver, Grid(cfg.T, level), cfg.H, seed)


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(cfg: RunConfig) -> int:
    coeffs, eta = make_preset(cfg.preset, cfg.r, cfg.a, cfg.b0)
    drv = _driver(cfg, cfg.level, cfg.seed)
    t0 = time.perf_counter()
    res = euler_run(coeffs, eta, drv, cfg.level)
    out = _outdir(cfg)
    io.write_scheme_result(res, out / "path.csv")
    io.write_json(
        {
            "command": "simulate",
            "config": asdict(cfg),
            "driver": io.driver_sidecar(drv),
            "coefficients": coeffs.name,
            "elapsed_s": time.perf_counter() - t0,
        },
        out / "meta.json",
    )
    print(f"wrote {out / 'path.csv'} ({res.grid.size + 1} rows)")
    return EXIT_OK


def cmd_converge(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    if cfg.driver in ("fbm", "fbm_circulant"):
        mc = MonteCarloConfig(
            preset=cfg.preset, a=cfg.a, b0=cfg.b0, H=cfg.H, T=cfg.T, r=cfg.r,
            seeds=cfg.seeds, base_seed=cfg.base_seed, n_min=cfg.n_min, n_max=cfg.n_max,
            workers=cfg.workers,
        )
        report = monte_carlo_convergence(mc)
    else:
        # one fixed driver: no seeds to average over
        coeffs, eta = make_preset(cfg.preset, cfg.r, cfg.a, cfg.b0)
        drv = _driver(cfg, cfg.n_max, cfg.seed)
        levels = list(range(cfg.n_min, cfg.n_max))
        d = cauchy_diffs(coeffs, eta, drv, cfg.n_min, cfg.n_max)
        rate = estimate_rate(d, levels) if len(levels) >= 3 else RateFit(float("nan"), float("nan"))
        report = ConvergenceReport(levels, {cfg.seed: d}, {cfg.seed: rate}, config=asdict(cfg))
    out = _outdir(cfg)
    io.write_convergence_report(report, out)
    io.write_json(
        {"command": "converge", "config": asdict(cfg), "elapsed_s": time.perf_counter() - t0},
        out / "meta.json",
    )
    print(f"median rate {report.median_rate:.4g} over {len(report.diffs)} seeds; wrote {out / 'diffs.csv'}")
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    results = checks.run_all(cfg)
    for res in results:
        if res.ok:
            print(f"PASS {res.name}: {res.detail}")
        else:
            print(f"FAIL {res.name}: {'; '.join(res.failed)}")
    failed = [r.name for r in results if not r.ok]
    if failed:
        print(f"failing invariants: {', '.join(failed)}")
        return EXIT_CHECK
    return EXIT_OK


def cmd_fbm(cfg: RunConfig) -> int:
    drv = _driver(cfg, cfg.level, cfg.seed)
    out = _outdir(cfg)
    io.write_driver(drv, out / "driver.csv", out / "driver.json")
    print(f"wrote {out / 'driver.csv'}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "converge": cmd_converge, "check": cmd_check, "fbm": cmd_fbm}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
    except (ConfigError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except (DomainError, PreconditionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, GenerationError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
