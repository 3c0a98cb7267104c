"""File formats: binary plane stacks, annotation JSON, detections JSON.

Score stacks are stored raw (32-bit little-endian floats) instead of as
image files so values round-trip exactly. Three magics share one layout
of header ``magic, version u16, n u16, H u32, W u32`` followed by n
planes of H*W values:

  PSES  float32 planes constrained to [0, 1] (scores / 0-1 labels)
  PSEF  float32 planes, unconstrained (gradients)
  PSEL  int32 planes (label maps)
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .labelgen import Annotation, Region
from .pse import Detection, RotatedRect

FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHII")


class FormatError(ValueError):
    """Malformed or inconsistent file content."""


def _write_planes(path, stack: np.ndarray, magic: bytes, dtype: str) -> None:
    if stack.ndim == 2:
        stack = stack[None]
    if stack.ndim != 3:
        raise FormatError(f"expected (n, H, W) planes, got shape {stack.shape}")
    n, height, width = stack.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(magic, FORMAT_VERSION, n, height, width))
        fh.write(np.ascontiguousarray(stack, dtype=dtype).tobytes())


def _read_planes(path, magic: bytes, dtype: str) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    got_magic, version, n, height, width = _HEADER.unpack_from(raw)
    if got_magic != magic:
        raise FormatError(f"{path}: bad magic {got_magic!r}, expected {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + n * height * width * 4
    if len(raw) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    planes = np.frombuffer(raw, dtype=dtype, offset=_HEADER.size)
    return planes.reshape(n, height, width).copy()


def write_score_stack(path, stack) -> None:
    """Write float32 planes in [0, 1], smallest scale first."""
    stack = np.asarray(stack, dtype=np.float32)
    if stack.size and (stack.min() < 0.0 or stack.max() > 1.0):
        raise FormatError("score planes must lie in [0, 1]")
    _write_planes(path, stack, b"PSES", "<f4")


def read_score_stack(path) -> np.ndarray:
    stack = _read_planes(path, b"PSES", "<f4")
    if stack.size and (stack.min() < 0.0 or stack.max() > 1.0 or not np.isfinite(stack).all()):
        raise FormatError(f"{path}: score values outside [0, 1]")
    return stack


def write_float_planes(path, planes) -> None:
    """Write unconstrained float32 planes (gradient buffers)."""
    _write_planes(path, np.asarray(planes, dtype=np.float32), b"PSEF", "<f4")


def read_float_planes(path) -> np.ndarray:
    return _read_planes(path, b"PSEF", "<f4")


def write_label_map(path, labels) -> None:
    """Write an int32 label map (or a stack of them)."""
    _write_planes(path, np.asarray(labels, dtype=np.int32), b"PSEL", "<i4")


def read_label_map(path) -> np.ndarray:
    planes = _read_planes(path, b"PSEL", "<i4")
    return planes[0] if planes.shape[0] == 1 else planes


def read_annotation(path) -> Annotation:
    with open(path) as fh:
        data = json.load(fh)
    return annotation_from_dict(data)


def annotation_from_dict(data: dict) -> Annotation:
    try:
        height = int(data["height"])
        width = int(data["width"])
        raw_regions = data.get("regions", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad annotation structure: {exc}") from exc
    regions = []
    for i, entry in enumerate(raw_regions):
        pts = np.asarray(entry.get("points", []), dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
            raise FormatError(f"region {i}: need >= 3 [x, y] points")
        regions.append(Region(pts, bool(entry.get("ignore", False))))
    try:
        return Annotation(height, width, regions)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def write_annotation(path, ann: Annotation) -> None:
    data = {
        "height": ann.height,
        "width": ann.width,
        "regions": [
            {"points": r.points.tolist(), "ignore": bool(r.ignore)} for r in ann.regions
        ],
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def detections_to_dict(dets: list[Detection], height: int, width: int,
                       scale_factor: float = 1.0) -> dict:
    entries = []
    for det in dets:
        entry: dict = {"label": det.label, "pixel_count": det.pixel_count}
        if det.rect is not None:
            entry["rect"] = {
                "center": list(det.rect.center),
                "size": list(det.rect.size),
                "angle": det.rect.angle,
            }
        if det.polygon is not None:
            entry["polygon"] = np.asarray(det.polygon).tolist()
        entries.append(entry)
    return {
        "height": height,
        "width": width,
        "scale_factor": scale_factor,
        "detections": entries,
    }


def detections_from_dict(data: dict) -> tuple[list[Detection], int, int]:
    try:
        height = int(data["height"])
        width = int(data["width"])
        entries = data["detections"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad detections structure: {exc}") from exc
    dets = []
    for entry in entries:
        rect = None
        polygon = None
        if "rect" in entry:
            r = entry["rect"]
            rect = RotatedRect(tuple(r["center"]), tuple(r["size"]), float(r["angle"]))
        if "polygon" in entry:
            polygon = np.asarray(entry["polygon"], dtype=np.float64)
        dets.append(Detection(int(entry["label"]), int(entry["pixel_count"]),
                              rect=rect, polygon=polygon))
    return dets, height, width


def write_detections(path, dets, height, width, scale_factor=1.0) -> None:
    with open(path, "w") as fh:
        json.dump(detections_to_dict(dets, height, width, scale_factor), fh, indent=2)
        fh.write("\n")


def read_detections(path) -> tuple[list[Detection], int, int]:
    with open(path) as fh:
        return detections_from_dict(json.load(fh))


def label_color(label: int) -> tuple[int, int, int]:
    """Deterministic RGB color for a label index; background 0 is black."""
    if label == 0:
        return (0, 0, 0)
    h = (label * 2654435761) & 0xFFFFFFFF
    r, g, b = (h >> 16) & 0xFF, (h >> 8) & 0xFF, h & 0xFF
    if max(r, g, b) < 64:
        r |= 0x80
    return (r, g, b)


def render_labels(labels: np.ndarray) -> np.ndarray:
    """Color a label map into an (H, W, 3) RGB image, background black."""
    labels = np.asarray(labels)
    top = int(labels.max(initial=0))
    lut = np.array([label_color(k) for k in range(top + 1)], dtype=np.uint8)
    return lut[labels]


def render_scores(stack: np.ndarray) -> np.ndarray:
    """Grayscale strip of all planes side by side, for quick inspection."""
    stack = np.asarray(stack, dtype=np.float32)
    if stack.ndim == 2:
        stack = stack[None]
    strip = np.concatenate(list(stack), axis=1)
    gray = np.clip(strip * 255.0, 0, 255).astype(np.uint8)
    return np.stack([gray] * 3, axis=-1)
