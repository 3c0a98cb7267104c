"""Command-line surface tying the pipeline together.

Subcommands: labelgen, pse, eval, render, synth, loss, bench. All flags
have long names; a JSON config file passed via --config supplies
defaults, with explicit flags taking precedence. Results go to stdout or
--out, diagnostics to stderr; exit code 0 on success, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys

import cv2
import numpy as np

from . import bench as bench_mod
from . import formats, synth
from .geometry import KernelSpec
from .labelgen import generate_labels
from .loss import dice_gradient, loss_report, ohem_mask
from .metrics import evaluate
from .pse import extract_detections, pse


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _scaled_ratio(value: str) -> float:
    return float(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psekit",
        description="kernel-based text detection post-processing toolkit",
    )
    parser.add_argument("--config", help="JSON file with default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("labelgen", help="rasterize kernel ground-truth masks")
    p.add_argument("--annotation", required=True)
    p.add_argument("--num-kernels", type=int, default=None)
    p.add_argument("--min-scale", type=float, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("pse", help="expand kernel score maps into a label map")
    p.add_argument("--scores", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--mode", choices=["rect", "polygon"], default=None)
    p.add_argument("--min-area", type=int, default=None)
    p.add_argument("--scale-factor", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--labels-out", default=None,
                   help="also write the raw label map (PSEL)")

    p = sub.add_parser("eval", help="precision/recall/F-measure of detections")
    p.add_argument("--detections", required=True)
    p.add_argument("--annotation", required=True)
    p.add_argument("--iou", type=float, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("render", help="render a label map or score stack to PNG")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("synth", help="generate a synthetic score stack")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("loss", help="loss report for a score stack vs labels")
    p.add_argument("--scores", required=True)
    p.add_argument("--labels", required=True,
                   help="label stack file as written by labelgen")
    p.add_argument("--balance", type=float, default=None)
    p.add_argument("--ohem-ratio", type=float, default=None)
    p.add_argument("--gradient-out", default=None,
                   help="write the dice gradient wrt the full-scale map (PSEF)")
    p.add_argument("--out", default=None)

    p = sub.add_parser("bench", help="timing scaling of the expansion")
    p.add_argument("--resolutions", default=None,
                   help="comma-separated square sizes, e.g. 160,320,640")
    p.add_argument("--num-kernels", type=int, default=None)
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--out", default=None)

    return parser


_DEFAULTS = {
    "labelgen": {"num_kernels": 3, "min_scale": 0.5},
    "pse": {"threshold": 0.5, "mode": "rect", "min_area": 16, "scale_factor": 1.0},
    "eval": {"iou": 0.5},
    "loss": {"balance": 0.7, "ohem_ratio": 3.0},
    "bench": {"resolutions": "160,320,640", "num_kernels": 6, "repeats": 20},
}


def _apply_config(args: argparse.Namespace) -> argparse.Namespace:
    config = {}
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)
    defaults = dict(_DEFAULTS.get(args.command, {}))
    defaults.update({k.replace("-", "_"): v for k, v in config.items()})
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    return args


def _write_json(data: dict, out_path) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_labelgen(args) -> int:
    ann = formats.read_annotation(args.annotation)
    spec = KernelSpec(args.num_kernels, args.min_scale)
    stack = generate_labels(ann, spec)
    for warning in stack.skipped:
        print(f"warning: {warning}", file=sys.stderr)
    planes = np.concatenate([stack.masks, stack.ignore[None]]).astype(np.float32)
    formats.write_score_stack(args.out, planes)
    return 0


def _cmd_pse(args) -> int:
    stack = formats.read_score_stack(args.scores)
    labels = pse(stack, args.threshold)
    dets = extract_detections(labels, mode=args.mode, min_area=args.min_area,
                              scale_factor=args.scale_factor)
    if args.labels_out:
        formats.write_label_map(args.labels_out, labels)
    height, width = labels.shape
    _write_json(formats.detections_to_dict(dets, height, width, args.scale_factor),
                args.out)
    return 0


def _cmd_eval(args) -> int:
    dets, height, width = formats.read_detections(args.detections)
    ann = formats.read_annotation(args.annotation)
    if (height, width) != (ann.height, ann.width):
        return _fail(f"image size mismatch: detections {height}x{width}, "
                     f"annotation {ann.height}x{ann.width}")
    report = evaluate(dets, ann, iou_threshold=args.iou)
    _write_json({
        "precision": report.precision,
        "recall": report.recall,
        "f_measure": report.f_measure,
        "matches": [list(m) for m in report.matches],
    }, args.out)
    return 0


def _cmd_render(args) -> int:
    with open(args.input, "rb") as fh:
        magic = fh.read(4)
    if magic == b"PSEL":
        rgb = formats.render_labels(formats.read_label_map(args.input))
    elif magic == b"PSES":
        rgb = formats.render_scores(formats.read_score_stack(args.input))
    else:
        return _fail(f"{args.input}: not a PSEL/PSES file")
    if not cv2.imwrite(args.out, rgb[:, :, ::-1]):
        return _fail(f"could not write {args.out}")
    return 0


def _cmd_synth(args) -> int:
    spec = synth.load_synth_spec(args.spec)
    formats.write_score_stack(args.out, synth.synth_stack(spec))
    return 0


def _cmd_loss(args) -> int:
    scores = formats.read_score_stack(args.scores)
    labels = formats.read_score_stack(args.labels)
    if labels.shape[0] != scores.shape[0] + 1:
        return _fail(
            f"label stack must carry {scores.shape[0]} masks plus an ignore plane, "
            f"found {labels.shape[0]} planes")
    masks = labels[:-1]
    ignore = labels[-1]
    report = loss_report(scores, masks, ignore=ignore, lam=args.balance,
                         ohem_ratio=args.ohem_ratio)
    if args.gradient_out:
        m = ohem_mask(scores[-1], masks[-1], ignore=ignore, ratio=args.ohem_ratio)
        grad = dice_gradient(scores[-1], masks[-1], mask=m.mask)
        formats.write_float_planes(args.gradient_out, grad.astype(np.float32))
    _write_json({
        "total": report.total,
        "l_c": report.l_c,
        "l_s": report.l_s,
        "lambda": report.lam,
        "dice_per_scale": report.dice_per_scale,
    }, args.out)
    return 0


def _cmd_bench(args) -> int:
    resolutions = [int(tok) for tok in str(args.resolutions).split(",") if tok]
    report = bench_mod.run_bench(resolutions, n=args.num_kernels, repeats=args.repeats)
    print(bench_mod.format_table(report), file=sys.stderr)
    _write_json(bench_mod.report_to_dict(report), args.out)
    return 0


_COMMANDS = {
    "labelgen": _cmd_labelgen,
    "pse": _cmd_pse,
    "eval": _cmd_eval,
    "render": _cmd_render,
    "synth": _cmd_synth,
    "loss": _cmd_loss,
    "bench": _cmd_bench,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(args)
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        return _fail(str(exc))


def main() -> None:
    sys.exit(run())
