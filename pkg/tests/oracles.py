"""Independent reference implementations used only as test oracles.

Everything here is deliberately naive: straightforward pure-Python or
third-party routines that do not share code with the library paths they
check.
"""

from __future__ import annotations

import math
from collections import deque

import cv2
import numpy as np

# neighbor order must mirror the library's documented order: up, left,
# right, down
NEIGHBORS = ((-1, 0), (0, -1), (0, 1), (1, 0))


def naive_components(mask: np.ndarray) -> np.ndarray:
    """Row-major flood-fill labeling, one deque per component."""
    height, width = mask.shape
    labels = np.zeros((height, width), dtype=np.int32)
    count = 0
    for r0 in range(height):
        for c0 in range(width):
            if not mask[r0, c0] or labels[r0, c0]:
                continue
            count += 1
            labels[r0, c0] = count
            queue = deque([(r0, c0)])
            while queue:
                r, c = queue.popleft()
                for dr, dc in NEIGHBORS:
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < height and 0 <= cc < width \
                            and mask[rr, cc] and not labels[rr, cc]:
                        labels[rr, cc] = count
                        queue.append((rr, cc))
    return labels


def naive_expand(labels: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Full multi-source BFS seeded from every labeled pixel.

    Seeds are enqueued in ascending label order, row-major within each
    label; a contested pixel goes to the first frontier that dequeues an
    adjacent pixel.
    """
    height, width = labels.shape
    out = labels.copy()
    queue = deque()
    for lab in range(1, int(out.max(initial=0)) + 1):
        for r, c in zip(*np.nonzero(out == lab)):
            queue.append((int(r), int(c)))
    while queue:
        r, c = queue.popleft()
        lab = out[r, c]
        for dr, dc in NEIGHBORS:
            rr, cc = r + dr, c + dc
            if 0 <= rr < height and 0 <= cc < width \
                    and out[rr, cc] == 0 and mask[rr, cc]:
                out[rr, cc] = lab
                queue.append((rr, cc))
    return out


def naive_pse(score_stack: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Reference pipeline: re-run the full BFS from scratch every round."""
    masks = [plane >= threshold for plane in score_stack]
    full = masks[-1]
    labels = naive_components(masks[0] & full)
    for mask in masks[1:]:
        labels = naive_expand(labels, mask & full)
    return labels


def point_in_polygon(x: float, y: float, vertices: np.ndarray) -> bool:
    """Even-odd rule by counting edge crossings strictly left of the point."""
    inside = False
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        if (y0 <= y) != (y1 <= y):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if xc <= x:
                inside = not inside
    return inside


def brute_rasterize(vertices: np.ndarray, height: int, width: int) -> np.ndarray:
    out = np.zeros((height, width), dtype=np.uint8)
    for r in range(height):
        for c in range(width):
            if point_in_polygon(c + 0.5, r + 0.5, vertices):
                out[r, c] = 1
    return out


def erode_disk_components(mask: np.ndarray, radius: float, supersample: int = 4):
    """Erode a region mask by a disk and count surviving components.

    Works on a supersampled grid so fractional radii behave; uses OpenCV
    erosion and component labeling, independent of the library's paths.
    Returns (component_count, eroded_area_in_original_pixels).
    """
    big = np.repeat(np.repeat(mask.astype(np.uint8), supersample, 0), supersample, 1)
    r = int(round(radius * supersample))
    kernel_size = 2 * r + 1
    kernel = cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (kernel_size, kernel_size))
    eroded = cv2.erode(big, kernel, borderValue=0)
    count, _ = cv2.connectedComponents(eroded, connectivity=4)
    return count - 1, float(eroded.sum()) / supersample**2


def sweep_min_rect_area(points: np.ndarray, step_deg: float = 0.1) -> float:
    """Exhaustive rotation sweep: min axis-aligned bbox area over angles."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    best = math.inf
    for angle in np.arange(0.0, 90.0, step_deg):
        theta = math.radians(angle)
        c, s = math.cos(theta), math.sin(theta)
        u = pts @ np.array([c, s])
        v = pts @ np.array([-s, c])
        area = (u.max() - u.min()) * (v.max() - v.min())
        best = min(best, area)
    return best


def central_difference_grad(fn, s: np.ndarray, step: float = 1e-4) -> np.ndarray:
    """Central finite differences of a scalar function of a 2-D map."""
    grad = np.zeros_like(s, dtype=np.float64)
    for idx in np.ndindex(s.shape):
        bumped = s.copy()
        bumped[idx] += step
        hi = fn(bumped)
        bumped[idx] -= 2 * step
        lo = fn(bumped)
        grad[idx] = (hi - lo) / (2 * step)
    return grad


def random_nested_stack(rng: np.random.Generator, max_size: int = 32) -> np.ndarray:
    """Random nested score stack for equivalence tests.

    The full mask is a union of random rectangles and blobs; smaller
    scales are successive erosions of it, so nesting holds by
    construction.
    """
    height = int(rng.integers(4, max_size + 1))
    width = int(rng.integers(4, max_size + 1))
    full = np.zeros((height, width), dtype=np.uint8)
    for _ in range(int(rng.integers(1, 5))):
        h = int(rng.integers(2, max(3, height // 2) + 1))
        w = int(rng.integers(2, max(3, width // 2) + 1))
        r0 = int(rng.integers(0, height - h + 1))
        c0 = int(rng.integers(0, width - w + 1))
        full[r0:r0 + h, c0:c0 + w] = 1
    n = int(rng.integers(2, 5))
    planes = [full]
    kernel = np.ones((3, 3), np.uint8)
    for _ in range(n - 1):
        planes.append(cv2.erode(planes[-1], kernel, borderValue=0))
    planes.reverse()  # smallest scale first
    return np.stack(planes).astype(np.float32)
