"""Timing harness for the expansion pipeline's linear-scaling claim.

Expansion cost should grow linearly with pixel count and be essentially
independent of the kernel count; this harness measures medians over
dense worst-case fixtures and fits both a linear model in pixels and a
log-log power law. Absolute milliseconds are hardware-specific and not
contractual, only the scaling behavior is. Runs are single-threaded.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from statistics import median

import numpy as np

from .pse import binarize, connected_components, extract_detections, pse
from .synth import dense_stack

WARMUP_RUNS = 2


@dataclass
class BenchRow:
    height: int
    width: int
    n: int
    pixels: int
    pse_ms: float
    components_ms: float
    total_ms: float


@dataclass
class Fit:
    slope: float
    intercept: float
    r2: float


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    fit: Fit | None = None          # pse_ms vs pixels, linear
    loglog_fit: Fit | None = None   # log(pse_ms) vs log(pixels)
    repeats: int = 0


def _fit(x: np.ndarray, y: np.ndarray) -> Fit:
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return Fit(float(slope), float(intercept), r2)


def _median_ms(fn, repeats: int) -> float:
    for _ in range(WARMUP_RUNS):
        fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1000.0)
    return median(times)


def run_bench(resolutions, n: int = 6, repeats: int = 20,
              threshold: float = 0.5) -> BenchReport:
    """Time the expansion pipeline on dense fixtures at each resolution.

    `resolutions` is a list of square sizes in pixels. `pse_ms` times the
    full pse call, `components_ms` the component labeling of the seed
    mask alone, and `total_ms` adds detection extraction on top.
    """
    if repeats < 5:
        raise ValueError(f"repeats must be >= 5, got {repeats}")
    report = BenchReport(repeats=repeats)
    for size in resolutions:
        stack = dense_stack(int(size), n)
        seed_mask = binarize(stack[0], threshold) & binarize(stack[-1], threshold)
        pse_ms = _median_ms(lambda: pse(stack, threshold), repeats)
        components_ms = _median_ms(lambda: connected_components(seed_mask), repeats)

        def _full():
            extract_detections(pse(stack, threshold), mode="rect")

        total_ms = _median_ms(_full, repeats)
        report.rows.append(BenchRow(int(size), int(size), n, int(size) * int(size),
                                    pse_ms, components_ms, total_ms))
    if len(report.rows) >= 2:
        px = np.array([row.pixels for row in report.rows], dtype=np.float64)
        ms = np.array([row.pse_ms for row in report.rows], dtype=np.float64)
        report.fit = _fit(px, ms)
        report.loglog_fit = _fit(np.log(px), np.log(ms))
    return report


def report_to_dict(report: BenchReport) -> dict:
    out: dict = {
        "repeats": report.repeats,
        "rows": [vars(row) for row in report.rows],
    }
    for name in ("fit", "loglog_fit"):
        fit = getattr(report, name)
        out[name] = vars(fit) if fit is not None else None
    return out


def format_table(report: BenchReport) -> str:
    lines = [f"{'resolution':>12} {'pixels':>10} {'pse_ms':>10} "
             f"{'components_ms':>14} {'total_ms':>10}"]
    for row in report.rows:
        lines.append(f"{row.height}x{row.width:>6} {row.pixels:>10} "
                     f"{row.pse_ms:>10.3f} {row.components_ms:>14.3f} "
                     f"{row.total_ms:>10.3f}")
    if report.fit is not None:
        lines.append(f"linear fit: {report.fit.slope:.3e} ms/px + "
                     f"{report.fit.intercept:.3f} ms (r2={report.fit.r2:.4f})")
    if report.loglog_fit is not None:
        lines.append(f"log-log slope: {report.loglog_fit.slope:.3f} "
                     f"(r2={report.loglog_fit.r2:.4f})")
    return "\n".join(lines)
