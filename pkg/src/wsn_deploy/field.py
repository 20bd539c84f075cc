"""Sensor coordinates and their CSV representation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadFile, EmptyField, LastSensor

COORD_HEADER = ("sensor_id", "x", "y")


@dataclass
class SensorField:
    """K planar sensor positions, stored as a (K, 2) array.

    ``ids`` follow each sensor through removals so logs and output files
    can refer to the original numbering.
    """

    coords: np.ndarray
    ids: np.ndarray = field(default=None)

    def __post_init__(self):
        self.coords = np.array(self.coords, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("sensor coordinates must be finite")
        if self.ids is None:
            self.ids = np.arange(len(self.coords), dtype=np.int64)
        else:
            self.ids = np.array(self.ids, dtype=np.int64).reshape(-1)
            if len(self.ids) != len(self.coords):
                raise ValueError("ids and coords differ in length")

    @property
    def k(self) -> int:
        return len(self.coords)

    def flat(self) -> np.ndarray:
        """Parameter vector (x1, y1, x2, y2, ...)."""
        return self.coords.reshape(-1).copy()

    def with_coords(self, coords) -> "SensorField":
        return SensorField(coords, self.ids.copy())

    def copy(self) -> "SensorField":
        return SensorField(self.coords.copy(), self.ids.copy())


def remove_sensor(f: SensorField, k: int) -> SensorField:
    """Drop sensor ``k`` (0-based position) keeping the others in order."""
    if f.k == 0:
        raise EmptyField("no sensors")
    if f.k == 1:
        raise LastSensor("cannot remove the last sensor")
    if not 0 <= k < f.k:
        raise IndexError(f"sensor index {k} out of range for K={f.k}")
    keep = np.arange(f.k) != k
    return SensorField(f.coords[keep], f.ids[keep])


def format_coords(f: SensorField) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COORD_HEADER)
    for i, (x, y) in zip(f.ids, f.coords):
        # repr round-trips float64 exactly
        w.writerow([int(i), repr(float(x)), repr(float(y))])
    return buf.getvalue()


def parse_coords(text: str, source: str = "<string>") -> SensorField:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(c.strip() for c in rows[0]) != COORD_HEADER:
        raise BadFile(f"{source}: expected header {','.join(COORD_HEADER)}")
    ids, coords = [], []
    for lineno, row in enumerate(rows[1:], 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise BadFile(f"{source}:{lineno}: expected 3 columns, got {len(row)}")
        try:
            ids.append(int(row[0]))
            x, y = float(row[1]), float(row[2])
        except ValueError as exc:
            raise BadFile(f"{source}:{lineno}: {exc}") from exc
        if not (np.isfinite(x) and np.isfinite(y)):
            raise BadFile(f"{source}:{lineno}: non-finite coordinate")
        coords.append((x, y))
    if not coords:
        raise BadFile(f"{source}: no sensors listed")
    if len(set(ids)) != len(ids):
        raise BadFile(f"{source}: duplicate sensor_id")
    return SensorField(np.array(coords), np.array(ids))


def read_coords(path) -> SensorField:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BadFile(f"{path}: {exc}") from exc
    return parse_coords(text, str(path))
