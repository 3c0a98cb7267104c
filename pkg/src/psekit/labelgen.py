"""Ground-truth kernel masks from polygon annotations.

Each text region is shrunk once per kernel scale and rasterized into a
0/1 mask; the masks nest from the smallest scale up to the full-size
region. Blurred regions flagged as ignore contribute a single full-scale
ignore mask instead of positives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    GeometryError,
    KernelSpec,
    Polygon,
    offset_inward,
    scale_ratios,
    shrink_offset,
)


@dataclass
class Region:
    """One annotated region: raw polygon points plus the ignore flag."""

    points: np.ndarray
    ignore: bool = False

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=np.float64)


@dataclass
class Annotation:
    """Polygon annotations for one image.

    Vertices are clamped into [0, W] x [0, H] on construction.
    """

    height: int
    width: int
    regions: list[Region] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.height < 1 or self.width < 1:
            raise ValueError(f"image size must be >= 1, got {self.height}x{self.width}")
        for region in self.regions:
            pts = region.points
            if pts.ndim != 2 or pts.shape[1] != 2:
                raise ValueError(f"region points must be (N, 2), got {pts.shape}")
            np.clip(pts[:, 0], 0.0, float(self.width), out=pts[:, 0])
            np.clip(pts[:, 1], 0.0, float(self.height), out=pts[:, 1])


@dataclass
class LabelStack:
    """Kernel ground-truth masks, smallest scale first, plus the ignore mask.

    `skipped` records regions dropped for degenerate geometry; label
    generation never fails outright on a bad region.
    """

    masks: np.ndarray   # (n, H, W) uint8
    ignore: np.ndarray  # (H, W) uint8
    skipped: list[str] = field(default_factory=list)

    @property
    def num_scales(self) -> int:
        return self.masks.shape[0]


def rasterize(polygon, height: int, width: int) -> np.ndarray:
    """Rasterize a polygon into an (H, W) uint8 mask.

    A pixel (x, y) is set iff its center (x+0.5, y+0.5) is inside the
    polygon under the even-odd rule; geometry outside the image is
    clipped away. Scanline fill with half-open [left, right) spans keeps
    the result deterministic when centers fall exactly on edges.
    """
    if isinstance(polygon, Polygon):
        v = polygon.vertices
    else:
        v = np.asarray(polygon, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise GeometryError(f"cannot rasterize vertex array of shape {v.shape}")
    out = np.zeros((height, width), dtype=np.uint8)
    _fill_even_odd(v, out)
    return out


def _fill_even_odd(v: np.ndarray, out: np.ndarray) -> None:
    height, width = out.shape
    y0 = v[:, 1]
    y1 = np.roll(y0, -1)
    x0 = v[:, 0]
    x1 = np.roll(x0, -1)
    row_lo = max(0, int(math.floor(y0.min() - 0.5)))
    row_hi = min(height, int(math.ceil(y0.max() + 0.5)))
    for row in range(row_lo, row_hi):
        yc = row + 0.5
        crosses = (y0 <= yc) != (y1 <= yc)
        if not crosses.any():
            continue
        t = (yc - y0[crosses]) / (y1[crosses] - y0[crosses])
        xs = np.sort(x0[crosses] + t * (x1[crosses] - x0[crosses]))
        for a, b in xs.reshape(-1, 2):
            left = max(0, int(math.ceil(a - 0.5)))
            right = min(width, int(math.ceil(b - 0.5)))
            if right > left:
                out[row, left:right] = 1


def generate_labels(ann: Annotation, spec: KernelSpec) -> LabelStack:
    """Build the kernel mask stack G_1..G_n and the ignore mask.

    For scale ratio r_i, every non-ignore region is offset inward by its
    shrink distance and rasterized; overlapping regions simply union.
    Regions whose kernel vanishes at a small scale contribute nothing at
    that scale. Degenerate regions are skipped with a warning record.
    """
    ratios = scale_ratios(spec)
    masks = np.zeros((spec.n, ann.height, ann.width), dtype=np.uint8)
    ignore = np.zeros((ann.height, ann.width), dtype=np.uint8)
    skipped: list[str] = []
    for idx, region in enumerate(ann.regions):
        try:
            poly = Polygon(region.points)
        except GeometryError as exc:
            skipped.append(f"region {idx}: {exc}")
            continue
        if region.ignore:
            ignore |= rasterize(poly, ann.height, ann.width)
            continue
        for i, r in enumerate(ratios):
            d = shrink_offset(poly, r)
            for piece in offset_inward(poly, d):
                masks[i] |= rasterize(piece, ann.height, ann.width)
    return LabelStack(masks, ignore, skipped)
