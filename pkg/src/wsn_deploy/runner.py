"""Run orchestration and output files.

Every run writes into ``config.output_dir``:

- ``sensors.csv``        sensor_id,x,y
- ``coverage_grid.csv``  x,y,p_fused,n_effect,detected (one row per target)
- ``loss_history.csv``   epoch,loss_ni,loss_cov,total,coverage_rate
- ``summary.json``       see :class:`RunSummary`
- ``removals.csv``       pass,removed_sensor_id,remaining_k (minsensors only)

Files are written to a temporary name and renamed into place. The summary's
coverage always comes from a fresh evaluation of the coordinates exactly
as written, so re-evaluating ``sensors.csv`` reproduces it.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
import tempfile
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import RunConfig
from .errors import ConfigError
from .field import SensorField, format_coords, parse_coords, read_coords
from .geometry import TargetGrid, discretize
from .minsensors import Removal, acquire_minimum
from .optimizer import LossBreakdown, evaluate, train
from .patterns import RNG_ALGORITHM, generate
from .sensing import DetectionReport

GRID_HEADER = ("x", "y", "p_fused", "n_effect", "detected")
HISTORY_HEADER = ("epoch", "loss_ni", "loss_cov", "total", "coverage_rate")
REMOVALS_HEADER = ("pass", "removed_sensor_id", "remaining_k")


@dataclass(frozen=True)
class CoverageReport:
    n_detected: int
    n_targets: int
    rho: float


def coverage_rate(report: DetectionReport, grid: TargetGrid) -> CoverageReport:
    if len(report) != grid.n_targets:
        raise ValueError(f"report has {len(report)} targets, grid has {grid.n_targets}")
    n = int(np.count_nonzero(report.detected))
    return CoverageReport(n, grid.n_targets, n / grid.n_targets)


@dataclass(frozen=True)
class RunSummary:
    command: str
    coverage: CoverageReport
    final_k: int
    wall_time_s: float
    epochs: int
    final_loss: LossBreakdown
    config: dict
    rng_algorithm: str = RNG_ALGORITHM
    version: str = __version__
    removals_path: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunSummary":
        d = json.loads(text)
        d["coverage"] = CoverageReport(**d["coverage"])
        d["final_loss"] = LossBreakdown(**d["final_loss"])
        return cls(**d)


def atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def format_grid(grid: TargetGrid, report: DetectionReport) -> str:
    rows = (
        (f"{x:.9g}", f"{y:.9g}", f"{p:.9g}", int(n), int(det))
        for (x, y), p, n, det in zip(grid.targets, report.fused, report.n_effect, report.detected)
    )
    return _csv(GRID_HEADER, rows)


def format_history(history: list[LossBreakdown]) -> str:
    rows = (
        (e, *(repr(float(v)) for v in (h.loss_ni, h.loss_cov, h.total, h.coverage_rate)))
        for e, h in enumerate(history)
    )
    return _csv(HISTORY_HEADER, rows)


def format_removals(removals: list[Removal]) -> str:
    return _csv(REMOVALS_HEADER, ((r.pass_index, r.removed_id, r.remaining_k) for r in removals))


def _setup(config: RunConfig):
    region = config.region.build()
    return region, discretize(region, config.grid_spacing)


def _initial_field(config: RunConfig, region) -> SensorField:
    if config.pattern.kind == "file":
        return read_coords(config.pattern.path)
    if config.sensor_count is None:
        raise ConfigError("sensors.count is required unless pattern.kind = file")
    return generate(config.pattern, config.sensor_count, region)


def _finish(command, config, grid, f, history, epochs, t0, removals=None) -> RunSummary:
    # round-trip through the CSV text so the summary describes exactly what is on disk
    coords_text = format_coords(f)
    f = parse_coords(coords_text)
    lb, report, _ = evaluate(f, grid, config.sensing, config.thresholds, config.training)
    out = Path(config.output_dir)
    atomic_write(out / "sensors.csv", coords_text)
    atomic_write(out / "coverage_grid.csv", format_grid(grid, report))
    atomic_write(out / "loss_history.csv", format_history(history))
    removals_path = None
    if removals is not None:
        removals_path = str(out / "removals.csv")
        atomic_write(removals_path, format_removals(removals))
    summary = RunSummary(
        command=command,
        coverage=coverage_rate(report, grid),
        final_k=f.k,
        wall_time_s=time.perf_counter() - t0,
        epochs=epochs,
        final_loss=lb,
        config=config.echo(),
        removals_path=removals_path,
    )
    atomic_write(out / "summary.json", summary.to_json())
    return summary


def run_deploy(config: RunConfig, callback=None) -> RunSummary:
    t0 = time.perf_counter()
    region, grid = _setup(config)
    initial = _initial_field(config, region)
    final, history = train(initial, grid, config.sensing, config.thresholds, config.training, callback=callback)
    return _finish("deploy", config, grid, final, history, len(history), t0)


def run_evaluate(config: RunConfig, coords_path, out_dir=None) -> RunSummary:
    """Score a fixed deployment; coordinates are used as given, without clamping."""
    t0 = time.perf_counter()
    if out_dir is not None:
        config = dataclasses.replace(config, output_dir=str(out_dir))
    _, grid = _setup(config)
    f = read_coords(coords_path)
    lb, _, _ = evaluate(f, grid, config.sensing, config.thresholds, config.training)
    return _finish("evaluate", config, grid, f, [lb], 0, t0)


def run_minsensors(config: RunConfig) -> RunSummary:
    if config.minsensors is None:
        raise ConfigError("minsensors.r_a is required for a minimum-sensors run")
    t0 = time.perf_counter()
    region, grid = _setup(config)
    initial = read_coords(config.pattern.path) if config.pattern.kind == "file" else None
    result = acquire_minimum(region, config.sensing, config.thresholds, config.minsensors, initial=initial, grid=grid)
    return _finish("minsensors", config, grid, result.field, result.history, result.epochs, t0, result.removals)


def run_generate(config: RunConfig, out_path) -> SensorField:
    region = config.region.build()
    f = _initial_field(config, region)
    atomic_write(out_path, format_coords(f))
    return f
