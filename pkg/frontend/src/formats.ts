/**
 * Binary plane-stack codecs shared with the native pipeline.
 *
 * One 16-byte little-endian header -- magic (4 bytes), version u16,
 * plane count u16, height u32, width u32 -- followed by the planes
 * row-major. `PSES` carries float32 scores in [0, 1], `PSEL` int32
 * label maps, `PSEF` unconstrained float32 planes.
 */

import { BufferView, PlaneArray, StackShape, checkStack } from "./buffers.js";

export const FORMAT_VERSION = 1;
export const HEADER_BYTES = 16;

export type Magic = "PSES" | "PSEL" | "PSEF";

export class FormatError extends Error {}

function writeHeader(out: DataView, magic: Magic, shape: StackShape): void {
  for (let i = 0; i < 4; i++) {
    out.setUint8(i, magic.charCodeAt(i));
  }
  out.setUint16(4, FORMAT_VERSION, true);
  out.setUint16(6, shape.planes, true);
  out.setUint32(8, shape.height, true);
  out.setUint32(12, shape.width, true);
}

function encodePlanes(
  planes: BufferView<PlaneArray>[],
  magic: Magic,
  bytesPerElement: 4,
): Uint8Array {
  const shape = checkStack(planes, magic);
  const planeBytes = shape.height * shape.width * bytesPerElement;
  const out = new Uint8Array(HEADER_BYTES + shape.planes * planeBytes);
  writeHeader(new DataView(out.buffer), magic, shape);
  planes.forEach((p, i) => {
    const src = new Uint8Array(p.data.buffer, p.data.byteOffset, p.data.byteLength);
    out.set(src, HEADER_BYTES + i * planeBytes);
  });
  return out;
}

export function encodeScoreStack(planes: BufferView<Float32Array>[]): Uint8Array {
  for (const [i, p] of planes.entries()) {
    for (const value of p.data) {
      if (!(value >= 0 && value <= 1)) {
        throw new FormatError(`PSES[${i}]: score ${value} outside [0, 1]`);
      }
    }
  }
  return encodePlanes(planes, "PSES", 4);
}

export function encodeFloatPlanes(planes: BufferView<Float32Array>[]): Uint8Array {
  return encodePlanes(planes, "PSEF", 4);
}

export function encodeLabelMap(planes: BufferView<Int32Array>[]): Uint8Array {
  return encodePlanes(planes, "PSEL", 4);
}

export interface DecodedStack<T extends PlaneArray> {
  shape: StackShape;
  /** all planes concatenated, length planes*height*width */
  data: T;
}

function decodeHeader(bytes: Uint8Array, magic: Magic): StackShape {
  if (bytes.byteLength < HEADER_BYTES) {
    throw new FormatError(`truncated header: ${bytes.byteLength} bytes`);
  }
  const dv = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const got = String.fromCharCode(dv.getUint8(0), dv.getUint8(1), dv.getUint8(2), dv.getUint8(3));
  if (got !== magic) {
    throw new FormatError(`bad magic ${JSON.stringify(got)}, expected ${magic}`);
  }
  const version = dv.getUint16(4, true);
  if (version !== FORMAT_VERSION) {
    throw new FormatError(`unsupported version ${version}`);
  }
  const shape = {
    planes: dv.getUint16(6, true),
    height: dv.getUint32(8, true),
    width: dv.getUint32(12, true),
  };
  const expected = HEADER_BYTES + shape.planes * shape.height * shape.width * 4;
  if (bytes.byteLength !== expected) {
    throw new FormatError(`expected ${expected} bytes, found ${bytes.byteLength}`);
  }
  return shape;
}

type ArrayCtor<T> = new (buffer: ArrayBuffer, byteOffset: number, length: number) => T;

function decodePlanes<T extends PlaneArray>(
  bytes: Uint8Array,
  magic: Magic,
  Ctor: ArrayCtor<T>,
): DecodedStack<T> {
  const shape = decodeHeader(bytes, magic);
  const count = shape.planes * shape.height * shape.width;
  const payloadOffset = bytes.byteOffset + HEADER_BYTES;
  if (payloadOffset % 4 === 0) {
    // zero-copy view straight into the source buffer
    return { shape, data: new Ctor(bytes.buffer as ArrayBuffer, payloadOffset, count) };
  }
  const copy = bytes.slice(HEADER_BYTES);
  return { shape, data: new Ctor(copy.buffer as ArrayBuffer, 0, count) };
}

export function decodeScoreStack(bytes: Uint8Array): DecodedStack<Float32Array> {
  return decodePlanes(bytes, "PSES", Float32Array);
}

export function decodeFloatPlanes(bytes: Uint8Array): DecodedStack<Float32Array> {
  return decodePlanes(bytes, "PSEF", Float32Array);
}

export function decodeLabelMap(bytes: Uint8Array): DecodedStack<Int32Array> {
  return decodePlanes(bytes, "PSEL", Int32Array);
}
