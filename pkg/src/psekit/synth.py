"""Synthetic score stacks from geometry, for tests and benchmarks.

A synth spec is a small JSON document:

    {
      "height": 120, "width": 240,
      "regions": [{"rect": [10, 10, 110, 50]},
                  {"points": [[x, y], ...]}],
      "kernels": 3, "min_scale": 0.5,
      "noise": 0.0, "seed": 0
    }

The ideal stack is the rasterized kernel label stack of the regions;
optional uniform noise (amplitude < 0.5 keeps the 0.5-binarization
unchanged) is added from the seeded generator and clamped to [0, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import KernelSpec
from .labelgen import Annotation, LabelStack, Region, generate_labels


@dataclass
class SynthSpec:
    height: int
    width: int
    regions: list[np.ndarray] = field(default_factory=list)
    kernels: int = 3
    min_scale: float = 0.5
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.noise < 0.5:
            raise ValueError(f"noise amplitude must be in [0, 0.5), got {self.noise}")


def rect_points(x0: float, y0: float, x1: float, y1: float) -> np.ndarray:
    return np.array([(x0, y0), (x1, y0), (x1, y1), (x0, y1)], dtype=np.float64)


def load_synth_spec(path) -> SynthSpec:
    with open(path) as fh:
        data = json.load(fh)
    return synth_spec_from_dict(data)


def synth_spec_from_dict(data: dict) -> SynthSpec:
    regions = []
    for i, entry in enumerate(data.get("regions", [])):
        if "rect" in entry:
            regions.append(rect_points(*map(float, entry["rect"])))
        elif "points" in entry:
            regions.append(np.asarray(entry["points"], dtype=np.float64))
        else:
            raise ValueError(f"region {i}: expected 'rect' or 'points'")
    return SynthSpec(
        height=int(data["height"]),
        width=int(data["width"]),
        regions=regions,
        kernels=int(data.get("kernels", 3)),
        min_scale=float(data.get("min_scale", 0.5)),
        noise=float(data.get("noise", 0.0)),
        seed=int(data.get("seed", 0)),
    )


def synth_labels(spec: SynthSpec) -> LabelStack:
    ann = Annotation(spec.height, spec.width,
                     [Region(pts) for pts in spec.regions])
    return generate_labels(ann, KernelSpec(spec.kernels, spec.min_scale))


def synth_stack(spec: SynthSpec) -> np.ndarray:
    """Generate the (n, H, W) float32 score stack for a synth spec."""
    stack = synth_labels(spec).masks.astype(np.float32)
    if spec.noise > 0.0:
        rng = np.random.default_rng(spec.seed)
        jitter = rng.uniform(-spec.noise, spec.noise, size=stack.shape).astype(np.float32)
        stack = np.clip(stack + jitter, 0.0, 1.0)
    return stack


def dense_stack(size: int, n: int, min_scale: float = 0.4) -> np.ndarray:
    """Worst-case benchmark fixture: one text region covering the image."""
    spec = SynthSpec(size, size,
                     [rect_points(1.0, 1.0, size - 1.0, size - 1.0)],
                     kernels=n, min_scale=min_scale)
    return synth_stack(spec)
