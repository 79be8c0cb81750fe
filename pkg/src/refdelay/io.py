"""CSV and JSON emission for paths, drivers, scheme runs and convergence reports.

Floats are written with 17 significant digits, which round-trips IEEE doubles.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import DomainError
from .fbm import DriverPath
from .paths import Grid, GridPath, InitialCondition
from .scheme import SchemeResult
from .skorokhod import ReflectionResult

FLOAT_FMT = "%.17g"


def _fmt(v) -> str:
    return FLOAT_FMT % v


def write_columns(file, header, columns) -> None:
    with open(file, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([_fmt(v) for v in row])


def read_columns(file) -> dict[str, np.ndarray]:
    with open(file, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in row] for row in body], dtype=float).reshape(len(body), len(header))
    return {name: data[:, k] for k, name in enumerate(header)}


def _grid_from_times(t: np.ndarray) -> Grid:
    cells = t.size - 1
    n = int(round(math.log2(cells))) if cells > 0 else -1
    if cells < 1 or (1 << n) != cells:
        raise DomainError(f"{t.size} rows do not form a dyadic grid")
    grid = Grid(float(t[-1]), n)
    if not np.allclose(grid.points, t, rtol=0, atol=1e-12 * grid.T):
        raise DomainError("time column is not the uniform dyadic grid")
    return grid


def write_grid_path(path: GridPath, file) -> None:
    write_columns(file, ["t", "value"], [path.grid.points, path.values])


def read_grid_path(file, eta: InitialCondition | None = None, r: float = 1.0) -> GridPath:
    """Read a ``t,value`` file; without ``eta`` the history is the constant first value."""
    cols = read_columns(file)
    grid = _grid_from_times(cols["t"])
    vals = cols["value"]
    if eta is None:
        eta = InitialCondition.constant(float(vals[0]), r)
    return GridPath(grid, vals, eta)


def write_reflection(res: ReflectionResult, file) -> None:
    write_columns(
        file,
        ["t", "f", "g", "l"],
        [res.input.grid.points, res.input.values, res.reflected.values, res.regulator.values],
    )


def read_reflection(file, r: float = 1.0) -> ReflectionResult:
    cols = read_columns(file)
    grid = _grid_from_times(cols["t"])
    eta = InitialCondition.constant(float(cols["f"][0]), r)
    return ReflectionResult(
        GridPath(grid, cols["f"], eta), GridPath(grid, cols["g"], eta), GridPath(grid, cols["l"], eta)
    )


def write_scheme_result(res: SchemeResult, file) -> None:
    write_columns(
        file,
        ["t", "x", "z", "l"],
        [res.grid.points, res.x.values, res.z.values, res.l.values],
    )


def read_scheme_result(file, eta: InitialCondition, driver_meta: dict | None = None) -> SchemeResult:
    cols = read_columns(file)
    grid = _grid_from_times(cols["t"])
    x0 = float(cols["x"][0])
    return SchemeResult(
        x=GridPath(grid, cols["x"], eta),
        z=GridPath(grid, cols["z"], InitialCondition.constant(x0, eta.r)),
        l=GridPath(grid, cols["l"], InitialCondition.constant(0.0, eta.r)),
        level=grid.n,
        driver_meta=dict(driver_meta or {}),
    )


def driver_sidecar(driver: DriverPath) -> dict:
    m = driver.meta
    return {"kind": m.get("kind"), "H": m.get("H"), "seed": m.get("seed"), "n": driver.level, **{
        k: v for k, v in m.items() if k not in ("kind", "H", "seed", "n")
    }}


def write_driver(driver: DriverPath, file, sidecar=None) -> None:
    write_columns(file, ["t", "g"], [driver.grid.points, driver.values])
    sidecar = Path(file).with_suffix(".json") if sidecar is None else sidecar
    write_json(driver_sidecar(driver), sidecar)


def read_driver(file, sidecar=None) -> DriverPath:
    cols = read_columns(file)
    grid = _grid_from_times(cols["t"])
    sidecar = Path(file).with_suffix(".json") if sidecar is None else Path(sidecar)
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    return DriverPath(grid, cols["g"], meta)


def write_json(obj, file) -> None:
    def default(o):
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(f"not JSON serializable: {type(o).__name__}")

    Path(file).write_text(json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n")


def write_convergence_report(report, directory) -> tuple[Path, Path]:
    """``diffs.csv`` (``n,seed,D_n``) and ``summary.json`` in ``directory``."""
    directory = Path(directory)
    diffs_file = directory / "diffs.csv"
    with open(diffs_file, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "seed", "D_n"])
        for seed in sorted(report.diffs, key=str):
            for n, d in zip(report.levels, report.diffs[seed]):
                w.writerow([n, seed, _fmt(d)])
    summary_file = directory / "summary.json"
    write_json(report.summary(), summary_file)
    return diffs_file, summary_file


def read_diffs(file) -> dict:
    """``{seed: [(n, D_n), ...]}`` from a ``diffs.csv`` file."""
    out: dict = {}
    with open(file, newline="") as fh:
        for row in csv.DictReader(fh):
            seed = row["seed"]
            seed = int(seed) if seed.lstrip("-").isdigit() else seed
            out.setdefault(seed, []).append((int(row["n"]), float(row["D_n"])))
    return out
