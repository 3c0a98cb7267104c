"""Polygon arithmetic for kernel-based text detection labels.

Coordinates are real-valued pixels, x to the right and y down. All
operations here are pure functions on immutable values and are safe to
call from any number of threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from shapely.geometry import Polygon as _ShapelyPolygon

EPS = 1e-6          # geometric tolerance in pixels
MIN_AREA = 1e-9     # polygons below this absolute area are degenerate
MITRE_LIMIT = 2.0   # miter joins fall back to bevel past this ratio


class GeometryError(ValueError):
    """Degenerate or self-intersecting polygon."""


class Polygon:
    """Simple polygon normalized to counter-clockwise vertex order.

    Construction drops consecutive duplicate vertices, then rejects
    inputs with fewer than 3 remaining vertices, absolute area below
    ``MIN_AREA``, or a self-intersecting boundary. The vertex array is
    float64, shape (N, 2), and read-only.
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices) -> None:
        v = np.array(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or not np.isfinite(v).all():
            raise GeometryError("expected a finite (N, 2) vertex array")
        keep = np.any(v != np.roll(v, 1, axis=0), axis=1)
        v = v[keep]
        if len(v) < 3:
            raise GeometryError("polygon needs at least 3 distinct vertices")
        area2 = _signed_area2(v)
        if abs(area2) / 2.0 < MIN_AREA:
            raise GeometryError("degenerate polygon: area below tolerance")
        if area2 < 0:
            v = v[::-1].copy()
        if not _ShapelyPolygon(v).is_valid:
            raise GeometryError("self-intersecting polygon rejected")
        v.setflags(write=False)
        self.vertices = v

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return f"Polygon({len(self.vertices)} vertices, area={area(self):.3f})"

    def shapely(self) -> _ShapelyPolygon:
        return _ShapelyPolygon(self.vertices)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel-scale hyper-parameters: `n` scales ramping up from `m` to 1."""

    n: int
    m: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"kernel count must be >= 1, got {self.n}")
        if not 0.0 < self.m <= 1.0:
            raise ValueError(f"minimal scale ratio must be in (0, 1], got {self.m}")


def _signed_area2(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def area(p: Polygon) -> float:
    """Shoelace area in pixels^2, positive by orientation normalization."""
    return _signed_area2(p.vertices) / 2.0


def perimeter(p: Polygon) -> float:
    """Sum of edge lengths including the closing edge, in pixels."""
    d = np.roll(p.vertices, -1, axis=0) - p.vertices
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def scale_ratios(spec: KernelSpec) -> list[float]:
    """Per-kernel scale ratios, linear from `m` up to 1 (smallest first)."""
    if spec.n == 1:
        return [1.0]
    return [1.0 - (1.0 - spec.m) * (spec.n - i) / (spec.n - 1) for i in range(1, spec.n + 1)]


def shrink_offset(p: Polygon, r: float) -> float:
    """Inward offset distance `d` so the shrunk polygon scales to ratio `r`.

    d = Area(p) * (1 - r^2) / Perimeter(p). Zero exactly when r == 1.
    """
    if not 0.0 < r <= 1.0:
        raise ValueError(f"scale ratio must be in (0, 1], got {r}")
    if r == 1.0:
        return 0.0
    return area(p) * (1.0 - r * r) / perimeter(p)


def offset_inward(p: Polygon, d: float) -> list[Polygon]:
    """Offset the polygon boundary inward by `d` pixels.

    Miter joins with a 2x miter limit (bevel fallback). A concave polygon
    may split into several pieces; an over-deep offset vanishes and
    returns an empty list, which is a legitimate outcome rather than an
    error. `d == 0` returns the input unchanged.
    """
    if d < 0:
        raise ValueError(f"offset distance must be >= 0, got {d}")
    if d == 0.0:
        return [p]
    shrunk = p.shapely().buffer(-d, join_style="mitre", mitre_limit=MITRE_LIMIT)
    if shrunk.is_empty:
        return []
    pieces = shrunk.geoms if shrunk.geom_type == "MultiPolygon" else [shrunk]
    out = []
    for piece in pieces:
        if piece.geom_type != "Polygon" or piece.area < MIN_AREA:
            continue
        ring = np.asarray(piece.exterior.coords)[:-1]
        try:
            out.append(Polygon(ring))
        except GeometryError:
            continue
    return out
