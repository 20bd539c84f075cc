"""Regions, target grids and bounding-box arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import BadFile, DegenerateRegion

EDGE_TOL = 1e-9


@dataclass(frozen=True)
class MBR:
    """Axis-aligned bounding box; ``length`` is the longer side."""

    length: float
    width: float
    anchor: tuple[float, float]
    # extent along x and y, needed for clamping and lattice placement
    size_x: float
    size_y: float

    @property
    def lo(self) -> np.ndarray:
        return np.array(self.anchor, dtype=float)

    @property
    def hi(self) -> np.ndarray:
        return np.array([self.anchor[0] + self.size_x, self.anchor[1] + self.size_y])


class Region:
    """A rectangle anchored at the origin or a simple polygon.

    Polygon vertices are stored counterclockwise without repeating the
    first vertex.
    """

    def __init__(self, vertices, kind: str = "polygon"):
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if len(v) > 1 and np.allclose(v[0], v[-1]):
            v = v[:-1]
        if len(v) < 3:
            raise DegenerateRegion("a region needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise DegenerateRegion("vertex coordinates must be finite")
        area = _signed_area(v)
        if abs(area) <= 1e-12:
            raise DegenerateRegion("region has zero area")
        if area < 0:
            v = v[::-1].copy()
        if kind == "polygon" and not _is_simple(v):
            raise DegenerateRegion("polygon edges intersect")
        v.setflags(write=False)
        self.vertices = v
        self.kind = kind
        self.area = abs(area)

    @classmethod
    def rectangle(cls, width: float, height: float) -> "Region":
        if not (width > 0 and height > 0):
            raise DegenerateRegion(f"rectangle {width}x{height} has no area")
        return cls([(0, 0), (width, 0), (width, height), (0, height)], kind="rectangle")

    @classmethod
    def from_file(cls, path) -> "Region":
        """Read a polygon: one ``x y`` pair per line, closing edge implicit."""
        pts = []
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise BadFile(f"{path}: {exc}") from exc
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise BadFile(f"{path}:{lineno}: expected 'x y', got {line!r}")
            try:
                pts.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise BadFile(f"{path}:{lineno}: {exc}") from exc
        return cls(pts)

    def translated(self, dx: float, dy: float) -> "Region":
        return Region(self.vertices + np.array([dx, dy]))

    def centroid(self) -> np.ndarray:
        v = self.vertices
        x, y = v[:, 0], v[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        a = cross.sum() / 2.0
        return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6.0 * a)

    def __repr__(self):
        if self.kind == "rectangle":
            w, h = self.vertices[2]
            return f"Region.rectangle({w:g}, {h:g})"
        return f"Region(<{len(self.vertices)} vertices>)"


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_cross(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        val = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if abs(val) <= 1e-12 else (1 if val > 0 else -1)

    def on_seg(a, b, c):
        return min(a[0], b[0]) - 1e-12 <= c[0] <= max(a[0], b[0]) + 1e-12 and \
            min(a[1], b[1]) - 1e-12 <= c[1] <= max(a[1], b[1]) + 1e-12

    o1, o2 = orient(p1, p2, p3), orient(p1, p2, p4)
    o3, o4 = orient(p3, p4, p1), orient(p3, p4, p2)
    if o1 != o2 and o3 != o4:
        return True
    return (o1 == 0 and on_seg(p1, p2, p3)) or (o2 == 0 and on_seg(p1, p2, p4)) or \
        (o3 == 0 and on_seg(p3, p4, p1)) or (o4 == 0 and on_seg(p3, p4, p2))


def _is_simple(v: np.ndarray) -> bool:
    n = len(v)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        for j in range(i + 1, n):
            # adjacent edges share a vertex by construction
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(a, b, v[j], v[(j + 1) % n]):
                return False
    return True


def distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def mbr(region: Region) -> MBR:
    lo = region.vertices.min(axis=0)
    hi = region.vertices.max(axis=0)
    sx, sy = float(hi[0] - lo[0]), float(hi[1] - lo[1])
    return MBR(
        length=max(sx, sy),
        width=min(sx, sy),
        anchor=(float(lo[0]), float(lo[1])),
        size_x=sx,
        size_y=sy,
    )


def k_mbr_min(length: float, width: float, r_s: float) -> int:
    """Sensors needed to cover an L x W box on a square lattice of pitch sqrt(2) r_s."""
    if not (length > 0 and width > 0 and r_s > 0):
        raise ValueError("length, width and r_s must be positive")
    pitch = math.sqrt(2.0) * r_s
    return math.ceil(length / pitch) * math.ceil(width / pitch)


def partition_lattice(region: "Region", r_s: float) -> np.ndarray:
    """Centers of the ``k_mbr_min`` cells that split the region's MBR into a
    ceil(L/pitch) x ceil(W/pitch) grid, row by row from the lower-left.

    Every cell is at most pitch = sqrt(2) r_s on a side, so each point of the
    box lies within r_s of its cell center.
    """
    box = mbr(region)
    pitch = math.sqrt(2.0) * r_s
    nx = math.ceil(box.size_x / pitch)
    ny = math.ceil(box.size_y / pitch)
    xs = box.lo[0] + (np.arange(nx) + 0.5) * (box.size_x / nx)
    ys = box.lo[1] + (np.arange(ny) + 0.5) * (box.size_y / ny)
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def points_in_region(points: np.ndarray, region: Region) -> np.ndarray:
    """Even-odd ray casting; points within EDGE_TOL of an edge count as inside."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    px, py = pts[:, 0:1], pts[:, 1:2]
    v = region.vertices
    x1, y1 = v[:, 0][None, :], v[:, 1][None, :]
    x2, y2 = np.roll(v[:, 0], -1)[None, :], np.roll(v[:, 1], -1)[None, :]

    straddles = (y1 > py) != (y2 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
    inside = (straddles & (px < x_cross)).sum(axis=1) % 2 == 1

    ex, ey = x2 - x1, y2 - y1
    seg_len2 = ex * ex + ey * ey
    t = np.clip(((px - x1) * ex + (py - y1) * ey) / seg_len2, 0.0, 1.0)
    dx, dy = px - (x1 + t * ex), py - (y1 + t * ey)
    on_edge = (dx * dx + dy * dy <= EDGE_TOL**2).any(axis=1)
    return inside | on_edge


def point_in_region(p, region: Region) -> bool:
    return bool(points_in_region(np.asarray(p, dtype=float)[None, :], region)[0])


@dataclass(frozen=True, eq=False)
class TargetGrid:
    """Lattice points over a region's bounding box with an inside mask."""

    points: np.ndarray
    mask: np.ndarray
    region: Region

    @property
    def n_targets(self) -> int:
        return int(self.mask.sum())

    @cached_property
    def targets(self) -> np.ndarray:
        """Masked-in points, shape (n_targets, 2)."""
        return self.points[self.mask]


def discretize(region: Region, spacing: float = 1.0) -> TargetGrid:
    """Lattice of pitch ``spacing`` anchored at the bounding box's lower-left corner."""
    if region.area <= 0:
        raise DegenerateRegion("region has zero area")
    box = mbr(region)
    # small slack so a side that is an exact multiple of the spacing keeps its far edge
    nx = int(math.floor(box.size_x / spacing + 1e-9)) + 1
    ny = int(math.floor(box.size_y / spacing + 1e-9)) + 1
    xs = box.anchor[0] + spacing * np.arange(nx)
    ys = box.anchor[1] + spacing * np.arange(ny)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    points = np.column_stack([gx.ravel(), gy.ravel()])
    if region.kind == "rectangle":
        mask = np.ones(len(points), dtype=bool)
    else:
        mask = points_in_region(points, region)
    return TargetGrid(points=points, mask=mask, region=region)
