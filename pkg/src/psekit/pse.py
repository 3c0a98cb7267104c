"""Progressive scale expansion over kernel score maps.

The pipeline thresholds each score map, labels the connected components
of the minimal-kernel mask, then grows every label through the
successively larger masks with a multi-source breadth-first search over
4-neighborhoods. A contested pixel goes to whichever label's frontier
dequeues it first; the fixed seeding order below (ascending label, then
row-major within a label) makes every conflict deterministic.

The BFS runs on flat arrays with a preallocated queue and stores visited
state in the output label map itself, so per-pixel work is constant and
the whole expansion is linear in the number of pixels.
Between rounds only boundary pixels (labeled pixels with an unlabeled
4-neighbor) are re-seeded; interior seeds can never claim anything, so
dropping them cannot change any conflict outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass
class RotatedRect:
    """Minimum-area rotated rectangle: center, size and angle in degrees.

    The angle is normalized to [0, 90); `size[0]` is the extent along the
    angle direction and `size[1]` the perpendicular extent.
    """

    center: tuple[float, float]
    size: tuple[float, float]
    angle: float

    def corners(self) -> np.ndarray:
        """4 corner points, float64 (4, 2), counter-clockwise."""
        c, s = math.cos(math.radians(self.angle)), math.sin(math.radians(self.angle))
        hx, hy = self.size[0] / 2.0, self.size[1] / 2.0
        local = np.array([(-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy)])
        rot = np.array([(c, -s), (s, c)])
        return local @ rot.T + np.asarray(self.center)

    def scaled(self, factor: float) -> "RotatedRect":
        return RotatedRect(
            (self.center[0] * factor, self.center[1] * factor),
            (self.size[0] * factor, self.size[1] * factor),
            self.angle,
        )


@dataclass
class Detection:
    """One extracted text instance."""

    label: int
    pixel_count: int
    rect: RotatedRect | None = None
    polygon: np.ndarray | None = None


def binarize(scores: np.ndarray, threshold: float) -> np.ndarray:
    """Threshold a score map: pixel is 1 iff score >= threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    scores = np.asarray(scores)
    return (scores >= threshold).astype(np.uint8)


@njit(cache=True)
def _cc_kernel(mask, labels, queue):
    height, width = mask.shape
    count = 0
    for start in range(height * width):
        r0 = start // width
        c0 = start - r0 * width
        if mask[r0, c0] == 0 or labels[r0, c0] != 0:
            continue
        count += 1
        labels[r0, c0] = count
        head = 0
        tail = 0
        queue[tail] = start
        tail += 1
        while head < tail:
            p = queue[head]
            head += 1
            r = p // width
            c = p - r * width
            if r > 0 and mask[r - 1, c] != 0 and labels[r - 1, c] == 0:
                labels[r - 1, c] = count
                queue[tail] = p - width
                tail += 1
            if c > 0 and mask[r, c - 1] != 0 and labels[r, c - 1] == 0:
                labels[r, c - 1] = count
                queue[tail] = p - 1
                tail += 1
            if c < width - 1 and mask[r, c + 1] != 0 and labels[r, c + 1] == 0:
                labels[r, c + 1] = count
                queue[tail] = p + 1
                tail += 1
            if r < height - 1 and mask[r + 1, c] != 0 and labels[r + 1, c] == 0:
                labels[r + 1, c] = count
                queue[tail] = p + width
                tail += 1
    return count


def connected_components(mask: np.ndarray) -> np.ndarray:
    """Label 4-connected components of a binary mask.

    Labels are assigned in row-major first-encounter order starting at 1;
    background stays 0. Returns an int32 map of the same shape.
    """
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    labels = np.zeros(mask.shape, dtype=np.int32)
    queue = np.empty(mask.size, dtype=np.int64)
    _cc_kernel(mask, labels, queue)
    return labels


@njit(cache=True)
def _bfs_kernel(labels, mask, seeds, queue):
    height, width = labels.shape
    tail = seeds.size
    queue[:tail] = seeds
    head = 0
    while head < tail:
        p = queue[head]
        head += 1
        r = p // width
        c = p - r * width
        lab = labels[r, c]
        # neighbor order: up, left, right, down
        if r > 0 and labels[r - 1, c] == 0 and mask[r - 1, c] != 0:
            labels[r - 1, c] = lab
            queue[tail] = p - width
            tail += 1
        if c > 0 and labels[r, c - 1] == 0 and mask[r, c - 1] != 0:
            labels[r, c - 1] = lab
            queue[tail] = p - 1
            tail += 1
        if c < width - 1 and labels[r, c + 1] == 0 and mask[r, c + 1] != 0:
            labels[r, c + 1] = lab
            queue[tail] = p + 1
            tail += 1
        if r < height - 1 and labels[r + 1, c] == 0 and mask[r + 1, c] != 0:
            labels[r + 1, c] = lab
            queue[tail] = p + width
            tail += 1


def _ordered_seeds(labels: np.ndarray, flat_index: np.ndarray) -> np.ndarray:
    # ascending label first, row-major within a label; flat_index is
    # already row-major so a stable sort on labels is enough
    order = np.argsort(labels.ravel()[flat_index], kind="stable")
    return flat_index[order]


def _boundary_seeds(labels: np.ndarray) -> np.ndarray:
    labeled = labels != 0
    vacant = ~labeled
    frontier = np.zeros_like(labeled)
    frontier[:-1] |= vacant[1:]
    frontier[1:] |= vacant[:-1]
    frontier[:, :-1] |= vacant[:, 1:]
    frontier[:, 1:] |= vacant[:, :-1]
    frontier &= labeled
    return _ordered_seeds(labels, np.flatnonzero(frontier))


def expand(kernels: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """One expansion round: grow labels into the mask's 1-pixels.

    Seeds every labeled pixel (ascending label, row-major within each
    label) and BFS-claims unlabeled 4-neighbors lying inside the mask.
    Existing labels are never overwritten and no new labels appear.
    """
    kernels = np.ascontiguousarray(kernels, dtype=np.int32)
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    if kernels.shape != mask.shape:
        raise ValueError(f"shape mismatch: kernels {kernels.shape} vs mask {mask.shape}")
    labels = kernels.copy()
    seeds = _ordered_seeds(labels, np.flatnonzero(labels.ravel()))
    if seeds.size:
        queue = np.empty(labels.size + seeds.size, dtype=np.int64)
        _bfs_kernel(labels, mask, seeds, queue)
    return labels


def pse(scores, threshold: float = 0.5) -> np.ndarray:
    """Run progressive scale expansion over a stack of score maps.

    `scores` holds the maps smallest scale first, as an (n, H, W) array
    or a sequence of (H, W) arrays, all values in [0, 1]. Minimal
    kernels are intersected with the full-scale mask before component
    labeling, and every round expands within the current mask
    intersected with the full-scale one, so stray predictions outside
    the text region can neither seed nor receive labels. Returns the
    int32 label map.
    """
    stack = np.asarray(scores, dtype=np.float32)
    if stack.ndim != 3 or stack.shape[0] < 1:
        raise ValueError(f"expected a non-empty (n, H, W) stack, got shape {stack.shape}")
    lo, hi = float(stack.min()), float(stack.max())
    if lo < 0.0 or hi > 1.0:
        raise ValueError(f"scores must lie in [0, 1], got range [{lo}, {hi}]")
    n = stack.shape[0]
    if n == 1:
        return connected_components(binarize(stack[0], threshold))
    full = binarize(stack[-1], threshold)
    labels = connected_components(binarize(stack[0], threshold) & full)
    queue = np.empty(labels.size * 2, dtype=np.int64)
    for i in range(1, n):
        mask = binarize(stack[i], threshold) & full
        seeds = _boundary_seeds(labels)
        if seeds.size:
            _bfs_kernel(labels, np.ascontiguousarray(mask), seeds, queue)
    return labels


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull, counter-clockwise, collinear points dropped."""
    pts = np.unique(np.asarray(points, dtype=np.float64).reshape(-1, 2), axis=0)
    if len(pts) <= 2:
        return pts
    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def min_area_rect(points) -> RotatedRect:
    """Minimum-area rotated rectangle enclosing a point set.

    Rotating-calipers over the convex hull: the optimal rectangle has one
    side collinear with a hull edge, so every hull edge direction is
    tried and the best kept.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("min_area_rect needs at least one point")
    hull = convex_hull(pts)
    if len(hull) == 1:
        return RotatedRect((float(hull[0, 0]), float(hull[0, 1])), (0.0, 0.0), 0.0)
    if len(hull) == 2:
        d = hull[1] - hull[0]
        theta = math.degrees(math.atan2(d[1], d[0]))
        mid = (hull[0] + hull[1]) / 2.0
        return _normalized_rect((float(mid[0]), float(mid[1])),
                                (float(np.hypot(*d)), 0.0), theta)
    edges = np.roll(hull, -1, axis=0) - hull
    best = None
    for ex, ey in edges:
        norm = math.hypot(ex, ey)
        if norm == 0.0:
            continue
        c, s = ex / norm, ey / norm
        u = hull @ np.array([c, s])
        v = hull @ np.array([-s, c])
        w, h = u.max() - u.min(), v.max() - v.min()
        if best is None or w * h < best[0]:
            cu, cv = (u.max() + u.min()) / 2.0, (v.max() + v.min()) / 2.0
            center = (cu * c - cv * s, cu * s + cv * c)
            best = (w * h, center, (w, h), math.degrees(math.atan2(s, c)))
    _, center, size, theta = best
    return _normalized_rect(center, size, theta)


def _normalized_rect(center, size, theta) -> RotatedRect:
    w, h = size
    theta %= 180.0
    if theta >= 90.0:
        theta -= 90.0
        w, h = h, w
    return RotatedRect(center, (w, h), theta)


# Moore neighborhood, clockwise in image coordinates starting west
_MOORE = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))
_MOORE_INDEX = {off: k for k, off in enumerate(_MOORE)}


def trace_boundary(mask: np.ndarray) -> np.ndarray:
    """Outer contour of a connected region by Moore boundary tracing.

    Returns pixel coordinates as a (K, 2) array of (x, y), walking the
    boundary from the region's first row-major pixel; that pixel's west
    neighbor is guaranteed empty and anchors the walk. One-pixel-wide
    appendages are traversed on both sides; the walk closes on the first
    re-entry of the start pixel, which the start's empty northern side
    makes a single-visit point of the boundary cycle.
    """
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        raise ValueError("cannot trace an empty region")
    height, width = mask.shape
    start = (int(rows[0]), int(cols[0]))
    cur, back = start, 0
    contour = [start]
    while True:
        nxt = None
        for step in range(1, 9):
            k = (back + step) % 8
            r, c = cur[0] + _MOORE[k][0], cur[1] + _MOORE[k][1]
            if 0 <= r < height and 0 <= c < width and mask[r, c]:
                prev_k = (back + step - 1) % 8
                prev = (cur[0] + _MOORE[prev_k][0], cur[1] + _MOORE[prev_k][1])
                nxt = (r, c)
                back = _MOORE_INDEX[(prev[0] - r, prev[1] - c)]
                break
        if nxt is None:
            break  # isolated pixel
        cur = nxt
        # the start pixel is the first row-major pixel, so its west and
        # whole northern side are empty and the boundary cycle passes
        # through it exactly once: first re-entry closes the walk
        if cur == start:
            break
        contour.append(cur)
        if len(contour) > 4 * mask.size + 8:
            raise RuntimeError("boundary trace failed to terminate")
    return np.array([(c, r) for r, c in contour], dtype=np.float64)


def extract_detections(
    labels: np.ndarray,
    mode: str = "rect",
    min_area: int = 16,
    scale_factor: float = 1.0,
) -> list[Detection]:
    """Turn a label map into detections, one per surviving label.

    Labels with fewer than `min_area` pixels are dropped. In "rect" mode
    the minimum-area rotated rectangle of the label's pixel centers is
    fitted and widened by one pixel per axis so the box spans full pixel
    extents (an axis-aligned 10x20 block yields exactly a 10x20
    rectangle); in "polygon" mode the traced outer contour is returned.
    Output coordinates are multiplied by `scale_factor` to undo any
    score-map downsampling.
    """
    if mode not in ("rect", "polygon"):
        raise ValueError(f"mode must be 'rect' or 'polygon', got {mode!r}")
    labels = np.asarray(labels)
    flat = labels.ravel()
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat)
    detections: list[Detection] = []
    stop = int(counts[0]) if counts.size else 0
    for lab in range(1, counts.size):
        npix = int(counts[lab])
        start, stop = stop, stop + npix
        if npix == 0 or npix < min_area:
            continue
        idx = order[start:stop]
        rr = idx // labels.shape[1]
        cc = idx - rr * labels.shape[1]
        if mode == "rect":
            rect = min_area_rect(_pixel_center_candidates(rr, cc))
            rect = RotatedRect(rect.center, (rect.size[0] + 1.0, rect.size[1] + 1.0),
                               rect.angle).scaled(scale_factor)
            detections.append(Detection(lab, npix, rect=rect))
        else:
            r0, c0 = int(rr.min()), int(cc.min())
            region = np.zeros((int(rr.max()) - r0 + 1, int(cc.max()) - c0 + 1), dtype=bool)
            region[rr - r0, cc - c0] = True
            contour = (trace_boundary(region) + (c0, r0)) * scale_factor
            detections.append(Detection(lab, npix, polygon=contour))
    return detections


def _pixel_center_candidates(rr: np.ndarray, cc: np.ndarray) -> np.ndarray:
    # pixels arrive row-major sorted; every convex-hull vertex of the
    # center cloud is the center of some row's leftmost or rightmost pixel
    row_break = np.flatnonzero(np.diff(rr)) + 1
    starts = np.concatenate(([0], row_break))
    ends = np.concatenate((row_break, [rr.size]))
    rows = rr[starts].astype(np.float64) + 0.5
    left = cc[starts].astype(np.float64) + 0.5
    right = cc[ends - 1].astype(np.float64) + 0.5
    return np.concatenate([np.column_stack((left, rows)),
                           np.column_stack((right, rows))])
