"""Shared deterministic fixtures for unit and acceptance tests."""

from __future__ import annotations

import numpy as np

from psekit.geometry import KernelSpec
from psekit.labelgen import Annotation, Region, generate_labels
from psekit.synth import rect_points


def four_kernel_stack() -> np.ndarray:
    """Three-scale stack with four kernels whose full masks touch.

    Mirrors the classic demonstration layout: four instances in a 2x2
    arrangement, minimal kernels well separated, largest masks dilated
    until adjacent instances become 4-connected.
    """
    import cv2

    regions = [
        Region(rect_points(6, 6, 58, 26)),
        Region(rect_points(66, 6, 118, 26)),
        Region(rect_points(6, 38, 58, 58)),
        Region(rect_points(66, 38, 118, 58)),
    ]
    ann = Annotation(64, 124, regions)
    stack = generate_labels(ann, KernelSpec(3, 0.4)).masks.astype(np.float32)
    bridged = cv2.dilate(stack[-1].astype(np.uint8), np.ones((3, 3), np.uint8),
                         iterations=3)
    stack[-1] = bridged.astype(np.float32)
    return stack


def close_pair_stack(gap: int = 3, m: float = 0.5):
    """Two rectangles `gap` px apart; full masks bridged by dilation.

    Returns (stack, kernel_masks) where the kernels stay disjoint while
    the bridged full mask is one 4-connected blob.
    """
    import cv2

    height, width = 64, 120
    ann = Annotation(height, width, [
        Region(rect_points(10, 10, 110, 29)),
        Region(rect_points(10, 29 + gap, 110, 29 + gap + 19)),
    ])
    stack = generate_labels(ann, KernelSpec(2, m)).masks.astype(np.float32)
    reach = gap // 2 + 1
    bridged = cv2.dilate(stack[-1].astype(np.uint8), np.ones((3, 3), np.uint8),
                         iterations=reach)
    stack[-1] = bridged.astype(np.float32)
    return stack


def size_gap_pair(n: int):
    """Two adjacent instances with a 4:1 width ratio, shared height.

    Returns (stack, gt_masks) where gt_masks holds each instance's
    full-scale rasterization separately.
    """
    height, width = 60, 220
    big = rect_points(4, 10, 164, 50)     # 160 x 40
    small = rect_points(164, 10, 204, 50)  # 40 x 40, touching the big one
    ann = Annotation(height, width, [Region(big), Region(small)])
    stack = generate_labels(ann, KernelSpec(n, 0.7)).masks.astype(np.float32)
    gt = generate_labels(ann, KernelSpec(1, 0.7)).masks[0]
    gt_big = generate_labels(Annotation(height, width, [Region(big)]),
                             KernelSpec(1, 0.7)).masks[0]
    gt_small = gt & ~gt_big
    return stack, (gt_big, gt_small)
