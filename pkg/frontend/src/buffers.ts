/**
 * Typed-array plane views.
 *
 * Callers hand in contiguous row-major buffers they own; nothing here
 * copies plane data except where a decoded file buffer is not 4-byte
 * aligned. Validation errors name the offending plane and dimension so
 * shape bugs surface at the boundary, not inside the pipeline.
 */

export type PlaneArray = Float32Array | Uint8Array | Int32Array;

export interface BufferView<T extends PlaneArray = Float32Array> {
  data: T;
  height: number;
  width: number;
  /** elements per row; defaults to `width` (contiguous) */
  rowStride?: number;
}

export interface StackShape {
  planes: number;
  height: number;
  width: number;
}

export function view<T extends PlaneArray>(
  data: T,
  height: number,
  width: number,
  rowStride?: number,
): BufferView<T> {
  return { data, height, width, rowStride };
}

/** Validate one plane view: finite dims, contiguity, exact length. */
export function checkView(v: BufferView<PlaneArray>, name: string): void {
  if (!Number.isInteger(v.height) || v.height < 1) {
    throw new RangeError(`${name}: height must be a positive integer, got ${v.height}`);
  }
  if (!Number.isInteger(v.width) || v.width < 1) {
    throw new RangeError(`${name}: width must be a positive integer, got ${v.width}`);
  }
  const stride = v.rowStride ?? v.width;
  if (stride !== v.width) {
    throw new RangeError(
      `${name}: rowStride ${stride} != width ${v.width}; only contiguous row-major buffers are accepted`,
    );
  }
  const expected = v.height * v.width;
  if (v.data.length !== expected) {
    throw new RangeError(
      `${name}: buffer holds ${v.data.length} elements, expected height*width = ${expected}`,
    );
  }
}

/** Validate a stack of plane views sharing one height/width. */
export function checkStack(planes: BufferView<PlaneArray>[], name: string): StackShape {
  if (planes.length === 0) {
    throw new RangeError(`${name}: need at least one plane`);
  }
  planes.forEach((p, i) => checkView(p, `${name}[${i}]`));
  const { height, width } = planes[0];
  planes.forEach((p, i) => {
    if (p.height !== height) {
      throw new RangeError(
        `${name}[${i}]: height ${p.height} differs from plane 0 height ${height}`,
      );
    }
    if (p.width !== width) {
      throw new RangeError(
        `${name}[${i}]: width ${p.width} differs from plane 0 width ${width}`,
      );
    }
  });
  return { planes: planes.length, height, width };
}
