"""Parameter sweeps over the (g1, g2) plane, persisted as CSV + JSON manifest.

Every grid cell is computed independently; results are merged by cell
index, so the output does not depend on the worker count or on completion
order. Cells that fail are written as empty fields with the reason in a
sidecar CSV and never abort the sweep.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bands import analyze_bands, central_band_r, r_statistic, reference_cutoffs
from .basis import ModelParams, build_basis, parity_sector
from .dynamics import FIGURE_TIMES, quench
from .eigensolve import eigh, eigvalsh
from .hamiltonian import build_hamiltonian
from .model import ground_state
from .observables import mean_photon_number, multifractal_dimension, participation_ratio, vnee_many
from .thermal import analytic_tc, mi_curve

log = logging.getLogger(__name__)

OBSERVABLES = (
    "gs_energy_density",
    "photon_density",
    "ipr_gs",
    "pr_state_k",
    "d1_state_k",
    "vnee_profile",
    "chi_lower",
    "chi_upper",
    "r_central",
    "quench_pr",
    "mi_grid",
    "tc_curve",
)
#: cell differences below this are rounding noise, not a failure to converge
CONVERGED_ATOL = 1e-12
#: observables whose cells carry one value per entry of a third axis
LAYERED = {"mi_grid": "T", "quench_pr": "t"}


class ConfigError(ValueError):
    pass


class CellError(RuntimeError):
    """A single grid cell could not be evaluated; recorded, not fatal."""


def parse_range(text: str) -> tuple[float, float, int]:
    """'min:max:steps' (or a single number) -> (min, max, steps)."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return v, v, 1
        if len(parts) == 3:
            return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        pass
    raise ConfigError(f"expected 'min:max:steps', got {text!r}")


def axis(spec) -> np.ndarray:
    lo, hi, steps = spec
    if steps < 1:
        raise ConfigError("grid steps must be >= 1")
    if steps == 1:
        return np.array([float(lo)])
    return np.linspace(lo, hi, int(steps))


@dataclass
class RunConfig:
    observable: str = "gs_energy_density"
    g1: tuple = (0.0, 2.0, 16)
    g2: tuple = (0.0, 2.0, 16)
    N: int = 20
    n_max: int = 100
    omega: float = 1.0
    omega0: float = 1.0
    state: str = "ground"
    temps: tuple | None = None
    times: tuple = FIGURE_TIMES
    out: str | None = None
    workers: int = 1
    resume: bool = False

    def __post_init__(self):
        self.g1 = tuple(parse_range(self.g1)) if isinstance(self.g1, str) else tuple(self.g1)
        self.g2 = tuple(parse_range(self.g2)) if isinstance(self.g2, str) else tuple(self.g2)
        if isinstance(self.temps, str):
            self.temps = parse_range(self.temps)
        if self.temps is not None:
            self.temps = tuple(self.temps)
        if isinstance(self.times, str):
            self.times = tuple(float(t) for t in self.times.split(","))
        self.times = tuple(float(t) for t in self.times)
        self.state = str(self.state)
        self.validate()

    def validate(self):
        if self.observable not in OBSERVABLES:
            raise ConfigError(f"unknown observable {self.observable!r}")
        for name in ("g1", "g2"):
            lo, hi, steps = getattr(self, name)
            if steps < 1:
                raise ConfigError(f"{name}: steps must be >= 1")
            if lo < 0 or hi < 0:
                raise ConfigError(f"{name}: couplings must be non-negative")
        if self.state not in ("ground", "middle") and not self.state.isdigit():
            raise ConfigError(f"state must be ground, middle or an integer, got {self.state!r}")
        if self.observable == "mi_grid":
            if self.temps is None:
                raise ConfigError("mi_grid needs a temperature grid (--temps)")
            if self.temps[0] < 0:
                raise ConfigError("temperatures must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            self.params(0.0, 0.0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def params(self, g1: float, g2: float) -> ModelParams:
        return ModelParams(omega=self.omega, omega0=self.omega0, g1=float(g1), g2=float(g2),
                           N=self.N, n_max=self.n_max)

    def layer_axis(self) -> np.ndarray | None:
        if self.observable == "mi_grid":
            return axis(self.temps)
        if self.observable == "quench_pr":
            return np.array(self.times)
        return None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["g1"], d["g2"] = list(self.g1), list(self.g2)
        d["temps"] = None if self.temps is None else list(self.temps)
        d["times"] = list(self.times)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path, **overrides) -> "RunConfig":
        try:
            d = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        d.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(d)


@dataclass
class PhaseGrid:
    """Observable values on a (g1, g2) lattice, optionally with a third
    axis (temperature or time). Missing cells are NaN."""

    g1_axis: np.ndarray
    g2_axis: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)
    layer_name: str | None = None
    layer_axis: np.ndarray | None = None
    reasons: dict = field(default_factory=dict)

    @property
    def missing(self) -> int:
        return int(np.count_nonzero(np.isnan(self.values)))

    def layer(self, k: int = 0) -> np.ndarray:
        return self.values if self.values.ndim == 2 else self.values[:, :, k]

    def write_csv(self, path) -> None:
        header = ["g1", "g2", "value"] if self.layer_name is None else ["g1", "g2", self.layer_name, "value"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for i, a in enumerate(self.g1_axis):
                for j, b in enumerate(self.g2_axis):
                    if self.layer_name is None:
                        w.writerow([_fmt(a), _fmt(b), _fmt(self.values[i, j])])
                    else:
                        for k, t in enumerate(self.layer_axis):
                            w.writerow([_fmt(a), _fmt(b), _fmt(t), _fmt(self.values[i, j, k])])

    def write_reasons(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["g1", "g2", "reason"])
            for (i, j), reason in sorted(self.reasons.items()):
                w.writerow([_fmt(self.g1_axis[i]), _fmt(self.g2_axis[j]), reason])

    @classmethod
    def read_csv(cls, path) -> "PhaseGrid":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        layered = len(header) == 4
        g1 = sorted({float(r[0]) for r in body})
        g2 = sorted({float(r[1]) for r in body})
        layer = sorted({float(r[2]) for r in body}) if layered else None
        shape = (len(g1), len(g2)) + ((len(layer),) if layered else ())
        values = np.full(shape, np.nan)
        i1 = {v: i for i, v in enumerate(g1)}
        i2 = {v: i for i, v in enumerate(g2)}
        il = {v: i for i, v in enumerate(layer)} if layered else None
        for r in body:
            idx = (i1[float(r[0])], i2[float(r[1])])
            if layered:
                idx += (il[float(r[2])],)
            values[idx] = float(r[-1]) if r[-1] != "" else np.nan
        meta = {}
        manifest = Path(str(path).replace(".csv", ".manifest.json"))
        if manifest.exists():
            meta = json.loads(manifest.read_text())
        return cls(np.array(g1), np.array(g2), values, meta,
                   header[2] if layered else None, np.array(layer) if layered else None)


def _fmt(x) -> str:
    x = float(x)
    return "" if math.isnan(x) else repr(x)


# --- cell evaluation --------------------------------------------------------


def _selected_state(params: ModelParams, basis, state: str):
    if state == "ground":
        return ground_state(params, basis)[1]
    idx = parity_sector(basis, 1)
    H = build_hamiltonian(params, basis)
    spec = eigh(H[np.ix_(idx, idx)])
    k = len(idx) // 2 if state == "middle" else int(state)
    if k >= len(idx):
        raise CellError(f"state index {k} outside the +1 sector (size {len(idx)})")
    v = np.zeros(basis.dim)
    v[idx] = spec.vectors[:, k]
    return v


def evaluate_cell(config: RunConfig, g1: float, g2: float):
    """Value of the configured observable at one (g1, g2) point.

    Returns a float, or an array over the layer axis for layered observables.
    """
    obs = config.observable
    params = config.params(g1, g2)
    if obs == "tc_curve":
        tc = analytic_tc(params)
        if tc is None:
            raise CellError("no transition: (g1+g2)^2 <= omega*omega0")
        return tc
    if obs == "mi_grid":
        return mi_curve(params, axis(config.temps))
    basis = build_basis(params)
    if obs == "gs_energy_density":
        return ground_state(params, basis)[0] / params.N
    if obs == "photon_density":
        return mean_photon_number(ground_state(params, basis)[1], basis)
    if obs == "ipr_gs":
        return 1.0 / participation_ratio(ground_state(params, basis)[1])
    if obs == "pr_state_k":
        return participation_ratio(_selected_state(params, basis, config.state))
    if obs == "d1_state_k":
        return multifractal_dimension(_selected_state(params, basis, config.state), 1.0, basis.dim)
    if obs == "r_central":
        e_lo, e_hi = reference_cutoffs(params, basis)
        idx = parity_sector(basis, 1)
        e = eigvalsh(build_hamiltonian(params, basis)[np.ix_(idx, idx)])
        band = e[(e >= e_lo) & (e <= e_hi)]
        if len(band) < 3:
            raise CellError(f"central band has only {len(band)} levels")
        return r_statistic(band).mean
    if obs in ("chi_lower", "chi_upper", "vnee_profile"):
        bands = analyze_bands(params, basis)
        if obs == "vnee_profile":
            return float(np.max(bands.profile.entropies)), bands.profile
        value = bands.chi_lower if obs == "chi_lower" else bands.chi_upper
        if value is None:
            raise CellError("degenerate VNEE profile: no entropy jumps")
        return value
    if obs == "quench_pr":
        return quench(params, config.times, basis).pr_t
    raise ConfigError(f"unknown observable {obs!r}")


def _run_cell(args):
    config_dict, i, j, g1, g2 = args
    config = RunConfig.from_dict(config_dict)
    try:
        value = evaluate_cell(config, g1, g2)
    except (CellError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        return i, j, None, f"{type(exc).__name__}: {exc}", None
    profile = None
    if isinstance(value, tuple):
        value, profile = value
    return i, j, value, None, profile


def _output_paths(config: RunConfig) -> dict[str, Path]:
    out = Path(config.out)
    base = config.observable
    return {
        "csv": out / f"{base}.csv",
        "manifest": out / f"{base}.manifest.json",
        "reasons": out / f"{base}.reasons.csv",
    }


def _check_writable(directory: Path) -> None:
    try:
        directory.mkdir(parents=True, exist_ok=True)
        probe = directory / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {directory} is not writable: {exc}") from exc


def manifest_for(config: RunConfig, grid: PhaseGrid) -> dict:
    return {
        "observable": config.observable,
        "config": config.to_dict(),
        "version": __version__,
        "n_max": config.n_max,
        "N": config.N,
        "state_selector": config.state,
        "parity_sector": 1,
        "g1_axis": [float(x) for x in grid.g1_axis],
        "g2_axis": [float(x) for x in grid.g2_axis],
        "layer": grid.layer_name,
        "layer_axis": None if grid.layer_axis is None else [float(x) for x in grid.layer_axis],
        "missing_cells": len(grid.reasons),
    }


def run_scan(config: RunConfig, write: bool = True) -> PhaseGrid:
    """Evaluate the configured observable on every (g1, g2) cell."""
    g1s, g2s = axis(config.g1), axis(config.g2)
    layer_axis = config.layer_axis()
    shape = (len(g1s), len(g2s)) + (() if layer_axis is None else (len(layer_axis),))
    values = np.full(shape, np.nan)
    reasons: dict = {}
    paths = _output_paths(config) if (write and config.out) else None
    if paths:
        _check_writable(paths["csv"].parent)

    done = set()
    if paths and config.resume and paths["csv"].exists():
        previous = PhaseGrid.read_csv(paths["csv"])
        if previous.values.shape == values.shape and np.allclose(previous.g1_axis, g1s) \
                and np.allclose(previous.g2_axis, g2s):
            for i in range(len(g1s)):
                for j in range(len(g2s)):
                    cell = previous.values[i, j]
                    if not np.any(np.isnan(cell)):
                        values[i, j] = cell
                        done.add((i, j))
        else:
            log.warning("existing output does not match the configured grid; recomputing")

    cfg = config.to_dict()
    jobs = [(cfg, i, j, float(a), float(b))
            for i, a in enumerate(g1s) for j, b in enumerate(g2s) if (i, j) not in done]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_cell, jobs, chunksize=1))
    else:
        results = [_run_cell(job) for job in jobs]

    profiles = {}
    for i, j, value, reason, profile in sorted(results, key=lambda r: (r[0], r[1])):
        if reason is not None:
            reasons[(i, j)] = reason
        else:
            values[i, j] = value
        if profile is not None:
            profiles[(i, j)] = profile

    grid = PhaseGrid(g1s, g2s, values, {}, LAYERED.get(config.observable), layer_axis, reasons)
    grid.metadata = manifest_for(config, grid)
    if paths:
        grid.write_csv(paths["csv"])
        grid.write_reasons(paths["reasons"])
        paths["manifest"].write_text(json.dumps(grid.metadata, indent=2, sort_keys=True) + "\n")
        for (i, j), prof in sorted(profiles.items()):
            with open(paths["csv"].parent / f"vnee_profile_{i}_{j}.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["E", "S"])
                w.writerows([_fmt(e), _fmt(s)] for e, s in zip(*prof))
    return grid


@dataclass
class ConvergenceReport:
    n_max_values: list
    grids: list
    differences: list
    converged: bool

    def to_dict(self) -> dict:
        return {
            "n_max_values": list(self.n_max_values),
            "max_abs_differences": [None if d is None else float(d) for d in self.differences],
            "converged": self.converged,
        }


def convergence_scan(config: RunConfig, n_max_values) -> ConvergenceReport:
    """Recompute the grid at each cutoff and compare consecutive cutoffs.

    The sweep is flagged as not converged when a cell-wise max difference
    fails to shrink from one pair of cutoffs to the next.
    """
    n_max_values = [int(n) for n in n_max_values]
    if len(n_max_values) < 2:
        raise ConfigError("convergence scan needs at least two cutoffs")
    grids = []
    for n_max in n_max_values:
        cfg = dataclasses.replace(config, n_max=n_max, resume=False)
        if config.out:
            cfg.out = os.path.join(config.out, f"nmax_{n_max}")
        grids.append(run_scan(cfg, write=bool(config.out)))
    diffs = []
    for a, b in zip(grids, grids[1:]):
        d = np.abs(a.values - b.values)
        diffs.append(float(np.nanmax(d)) if np.any(~np.isnan(d)) else None)
    finite = [d for d in diffs if d is not None]
    converged = all(b <= a or b <= CONVERGED_ATOL for a, b in zip(finite, finite[1:]))
    report = ConvergenceReport(n_max_values, grids, diffs, converged)
    if config.out:
        Path(config.out, "convergence.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return report
