/**
 * Bindings for kernel-based text detection post-processing.
 *
 * Exposes the expansion pipeline and the training-loss arithmetic to JS
 * tooling over plain typed arrays: encode the caller's buffers into the
 * shared binary formats, run the native CLI out of process, and decode
 * the results back into typed arrays the caller owns.
 */

import { BufferView, checkStack, view } from "./buffers.js";
import {
  decodeFloatPlanes,
  decodeLabelMap,
  encodeScoreStack,
} from "./formats.js";
import { runPipeline, workspace } from "./runner.js";

export * from "./buffers.js";
export * from "./formats.js";
export { PipelineError, pipelineBinary } from "./runner.js";

export interface RotatedRect {
  center: [number, number];
  size: [number, number];
  angle: number;
}

export interface Detection {
  label: number;
  pixelCount: number;
  rect?: RotatedRect;
  polygon?: [number, number][];
}

export interface PseOptions {
  threshold?: number;
  mode?: "rect" | "polygon";
  minArea?: number;
  scaleFactor?: number;
}

export interface PseResult {
  labels: Int32Array;
  height: number;
  width: number;
  labelCount: number;
  detections: Detection[];
}

export interface LossOptions {
  balance?: number;
  ohemRatio?: number;
}

export interface LossReport {
  total: number;
  lC: number;
  lS: number;
  lambda: number;
  dicePerScale: number[];
}

export interface LossResult {
  report: LossReport;
  /** analytic dice gradient wrt the full-scale map, OHEM-masked */
  gradient: Float32Array;
  height: number;
  width: number;
}

interface RawDetection {
  label: number;
  pixel_count: number;
  rect?: { center: [number, number]; size: [number, number]; angle: number };
  polygon?: [number, number][];
}

function parseDetections(payload: Buffer): Detection[] {
  const data = JSON.parse(payload.toString()) as { detections: RawDetection[] };
  return data.detections.map((d) => ({
    label: d.label,
    pixelCount: d.pixel_count,
    rect: d.rect ? { center: d.rect.center, size: d.rect.size, angle: d.rect.angle } : undefined,
    polygon: d.polygon,
  }));
}

/**
 * Expand a kernel score stack (smallest scale first) into instance
 * labels plus extracted detections. Matches the native `pse` op and
 * `extract_detections` exactly; label maps come back bit-identical to a
 * direct CLI run on the same planes.
 */
export function bindPse(
  scoreStack: BufferView<Float32Array>[],
  options: PseOptions = {},
): PseResult {
  checkStack(scoreStack, "scoreStack");
  const ws = workspace();
  try {
    const scoresPath = ws.write("scores.pses", encodeScoreStack(scoreStack));
    const labelsPath = ws.path("labels.psel");
    const detsPath = ws.path("dets.json");
    runPipeline([
      "pse",
      "--scores", scoresPath,
      "--threshold", String(options.threshold ?? 0.5),
      "--mode", options.mode ?? "rect",
      "--min-area", String(options.minArea ?? 16),
      "--scale-factor", String(options.scaleFactor ?? 1.0),
      "--out", detsPath,
      "--labels-out", labelsPath,
    ]);
    const { shape, data } = decodeLabelMap(ws.read("labels.psel"));
    let labelCount = 0;
    for (const value of data) {
      if (value > labelCount) labelCount = value;
    }
    return {
      labels: data,
      height: shape.height,
      width: shape.width,
      labelCount,
      detections: parseDetections(ws.read("dets.json")),
    };
  } finally {
    ws.dispose();
  }
}

/**
 * Loss breakdown plus the analytic dice gradient for a score stack
 * against its 0/1 label masks. `ignore` defaults to an all-zero mask.
 * Values match the native loss module to numerical identity (the
 * arithmetic runs natively; only serialization happens here).
 */
export function bindLosses(
  scoreStack: BufferView<Float32Array>[],
  labelMasks: BufferView<Float32Array>[],
  ignore?: BufferView<Float32Array>,
  options: LossOptions = {},
): LossResult {
  const shape = checkStack(scoreStack, "scoreStack");
  const labelShape = checkStack(labelMasks, "labelMasks");
  if (
    labelShape.planes !== shape.planes ||
    labelShape.height !== shape.height ||
    labelShape.width !== shape.width
  ) {
    throw new RangeError(
      `labelMasks shape ${labelShape.planes}x${labelShape.height}x${labelShape.width} ` +
      `must match scoreStack ${shape.planes}x${shape.height}x${shape.width}`,
    );
  }
  const ignorePlane =
    ignore ?? view(new Float32Array(shape.height * shape.width), shape.height, shape.width);
  const ws = workspace();
  try {
    const scoresPath = ws.write("scores.pses", encodeScoreStack(scoreStack));
    const labelsPath = ws.write(
      "labels.pses",
      encodeScoreStack([...labelMasks, ignorePlane]),
    );
    const gradPath = ws.path("grad.psef");
    const reportPath = ws.path("report.json");
    runPipeline([
      "loss",
      "--scores", scoresPath,
      "--labels", labelsPath,
      "--balance", String(options.balance ?? 0.7),
      "--ohem-ratio", String(options.ohemRatio ?? 3.0),
      "--gradient-out", gradPath,
      "--out", reportPath,
    ]);
    const raw = JSON.parse(ws.read("report.json").toString()) as {
      total: number;
      l_c: number;
      l_s: number;
      lambda: number;
      dice_per_scale: number[];
    };
    const { shape: gradShape, data } = decodeFloatPlanes(ws.read("grad.psef"));
    return {
      report: {
        total: raw.total,
        lC: raw.l_c,
        lS: raw.l_s,
        lambda: raw.lambda,
        dicePerScale: raw.dice_per_scale,
      },
      gradient: data,
      height: gradShape.height,
      width: gradShape.width,
    };
  } finally {
    ws.dispose();
  }
}
