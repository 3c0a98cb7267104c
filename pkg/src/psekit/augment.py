"""Training-time augmentation applied jointly to an image and its masks.

Transforms resample the image bilinearly and every mask with nearest
neighbor, which keeps the kernel-mask nesting intact because all masks
share one source-pixel mapping. Each function is pure given an explicit
numpy Generator, so batches can run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import cv2
import numpy as np


@dataclass
class Sample:
    """An image with its kernel masks and ignore mask, all H x W aligned."""

    image: np.ndarray   # (H, W, C) uint8
    masks: np.ndarray   # (n, H, W) uint8, smallest scale first
    ignore: np.ndarray  # (H, W) uint8

    def __post_init__(self) -> None:
        hw = self.image.shape[:2]
        if self.masks.shape[1:] != hw or self.ignore.shape != hw:
            raise ValueError(
                f"plane size mismatch: image {hw}, masks {self.masks.shape[1:]}, "
                f"ignore {self.ignore.shape}"
            )


@dataclass
class AugmentConfig:
    scales: list[float] = field(default_factory=lambda: [0.5, 1.0, 2.0, 3.0])
    flip_prob: float = 0.5
    rotate_range_deg: tuple[float, float] = (-10.0, 10.0)
    crop_size: tuple[int, int] = (640, 640)
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.scales or min(self.scales) <= 0:
            raise ValueError("scales must be nonempty and positive")
        if min(self.crop_size) <= 0:
            raise ValueError("crop_size must be positive")


def rescale(s: Sample, ratio: float) -> Sample:
    """Resample all planes by `ratio`; dimensions round to at least 1."""
    if ratio <= 0:
        raise ValueError(f"rescale ratio must be > 0, got {ratio}")
    if ratio == 1.0:
        return Sample(s.image.copy(), s.masks.copy(), s.ignore.copy())
    h, w = s.image.shape[:2]
    nh = max(1, int(round(h * ratio)))
    nw = max(1, int(round(w * ratio)))
    image = cv2.resize(s.image, (nw, nh), interpolation=cv2.INTER_LINEAR)
    if image.ndim == 2:
        image = image[:, :, None]
    masks = np.stack(
        [cv2.resize(m, (nw, nh), interpolation=cv2.INTER_NEAREST) for m in s.masks]
    )
    ignore = cv2.resize(s.ignore, (nw, nh), interpolation=cv2.INTER_NEAREST)
    return Sample(image, masks, ignore)


def hflip(s: Sample) -> Sample:
    """Mirror all planes about the vertical axis. Involutive, bit exact."""
    return Sample(
        s.image[:, ::-1].copy(),
        s.masks[:, :, ::-1].copy(),
        s.ignore[:, ::-1].copy(),
    )


def rotate(s: Sample, deg: float) -> Sample:
    """Rotate about the image center, canvas size preserved.

    Pixels swung in from outside the canvas are zero in the image and
    masks and flagged in the ignore mask, so fabricated background never
    contributes training negatives. Limited to |deg| <= 45.
    """
    if abs(deg) > 45.0:
        raise ValueError(f"rotation limited to +/-45 degrees, got {deg}")
    if deg == 0.0:
        return Sample(s.image.copy(), s.masks.copy(), s.ignore.copy())
    h, w = s.image.shape[:2]
    matrix = cv2.getRotationMatrix2D((w / 2.0, h / 2.0), deg, 1.0)
    image = cv2.warpAffine(s.image, matrix, (w, h), flags=cv2.INTER_LINEAR,
                           borderValue=0)
    if image.ndim == 2:
        image = image[:, :, None]
    masks = np.stack([
        cv2.warpAffine(m, matrix, (w, h), flags=cv2.INTER_NEAREST, borderValue=0)
        for m in s.masks
    ])
    inside = cv2.warpAffine(np.ones((h, w), np.uint8), matrix, (w, h),
                            flags=cv2.INTER_NEAREST, borderValue=0)
    ignore = cv2.warpAffine(s.ignore, matrix, (w, h), flags=cv2.INTER_NEAREST,
                            borderValue=0)
    ignore |= inside == 0
    return Sample(image, masks, ignore)


def random_crop(s: Sample, cfg: AugmentConfig, rng: np.random.Generator) -> Sample:
    """Crop to `cfg.crop_size`, biased toward crops that contain text.

    When the sample has any text pixel the origin is redrawn up to 10
    times until the crop intersects text; otherwise one unbiased draw is
    used. Samples smaller than the crop are padded bottom/right with
    zeros first, padding flagged as ignore.
    """
    ch, cw = cfg.crop_size
    s = _pad_to(s, ch, cw)
    h, w = s.image.shape[:2]
    if (h, w) == (ch, cw):
        return Sample(s.image.copy(), s.masks.copy(), s.ignore.copy())
    text = s.masks[-1]
    has_text = bool(text.any())
    y0 = x0 = 0
    for _ in range(10):
        y0 = int(rng.integers(0, h - ch + 1))
        x0 = int(rng.integers(0, w - cw + 1))
        if not has_text or text[y0:y0 + ch, x0:x0 + cw].any():
            break
    return Sample(
        s.image[y0:y0 + ch, x0:x0 + cw].copy(),
        s.masks[:, y0:y0 + ch, x0:x0 + cw].copy(),
        s.ignore[y0:y0 + ch, x0:x0 + cw].copy(),
    )


def _pad_to(s: Sample, min_h: int, min_w: int) -> Sample:
    h, w = s.image.shape[:2]
    if h >= min_h and w >= min_w:
        return s
    ph, pw = max(0, min_h - h), max(0, min_w - w)
    image = np.pad(s.image, ((0, ph), (0, pw), (0, 0)))
    masks = np.pad(s.masks, ((0, 0), (0, ph), (0, pw)))
    ignore = np.pad(s.ignore, ((0, ph), (0, pw)), constant_values=1)
    return Sample(image, masks, ignore)


def augment_sample(s: Sample, cfg: AugmentConfig,
                   rng: np.random.Generator | None = None) -> Sample:
    """The full pipeline: random rescale, flip, rotate, then crop."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    s = rescale(s, cfg.scales[int(rng.integers(0, len(cfg.scales)))])
    if rng.random() < cfg.flip_prob:
        s = hflip(s)
    lo, hi = cfg.rotate_range_deg
    s = rotate(s, float(rng.uniform(lo, hi)))
    return random_crop(s, cfg, rng)
