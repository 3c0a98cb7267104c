"""Kernel-based scene-text detection post-processing toolkit.

Covers the non-neural side of a multi-kernel text detector: shrunk
ground-truth label generation, progressive scale expansion of predicted
kernel maps into instance labels, detection extraction, the training
loss arithmetic with OHEM, mask-consistent augmentation, and
detection-level evaluation.
"""

from .augment import AugmentConfig, Sample, augment_sample, hflip, random_crop, rescale, rotate
from .bench import BenchReport, BenchRow, run_bench
from .geometry import (
    EPS,
    GeometryError,
    KernelSpec,
    Polygon,
    area,
    offset_inward,
    perimeter,
    scale_ratios,
    shrink_offset,
)
from .labelgen import Annotation, LabelStack, Region, generate_labels, rasterize
from .loss import (
    LossReport,
    OhemMask,
    dice,
    dice_gradient,
    loss_complete,
    loss_report,
    loss_shrunk,
    ohem_mask,
    total_loss,
)
from .metrics import EvalReport, evaluate, polygon_iou
from .pse import (
    Detection,
    RotatedRect,
    binarize,
    connected_components,
    expand,
    extract_detections,
    min_area_rect,
    pse,
    trace_boundary,
)
from .synth import SynthSpec, dense_stack, rect_points, synth_stack

__version__ = "0.1.0"

__all__ = [
    "AugmentConfig", "Sample", "augment_sample", "hflip", "random_crop",
    "rescale", "rotate",
    "BenchReport", "BenchRow", "run_bench",
    "EPS", "GeometryError", "KernelSpec", "Polygon", "area", "offset_inward",
    "perimeter", "scale_ratios", "shrink_offset",
    "Annotation", "LabelStack", "Region", "generate_labels", "rasterize",
    "LossReport", "OhemMask", "dice", "dice_gradient", "loss_complete",
    "loss_report", "loss_shrunk", "ohem_mask", "total_loss",
    "EvalReport", "evaluate", "polygon_iou",
    "Detection", "RotatedRect", "binarize", "connected_components", "expand",
    "extract_detections", "min_area_rect", "pse", "trace_boundary",
    "SynthSpec", "dense_stack", "rect_points", "synth_stack",
    "__version__",
]
