/**
 * Minimal reader for the .npy saved-array format, versions 1.0-3.0.
 *
 * Covers what prediction and label dumps actually use: little-endian
 * numeric dtypes, C order, 1-D or 2-D. Everything else is rejected
 * with a message saying how to re-save the array.
 */

import { IoError } from "./errors.js";

const MAGIC = Buffer.from("\x93NUMPY", "latin1");

export interface NpyArray {
  /** dtype string as found in the header, e.g. "<f4" */
  descr: string;
  shape: number[];
  /** values widened to float64; exact for every supported dtype */
  data: Float64Array;
}

type Reader = (view: DataView, byteOffset: number) => number;

// itemsize and element reader per supported descr
const DTYPES: Record<string, { size: number; read: Reader }> = {
  "<f4": { size: 4, read: (v, o) => v.getFloat32(o, true) },
  "<f8": { size: 8, read: (v, o) => v.getFloat64(o, true) },
  "|i1": { size: 1, read: (v, o) => v.getInt8(o) },
  "<i2": { size: 2, read: (v, o) => v.getInt16(o, true) },
  "<i4": { size: 4, read: (v, o) => v.getInt32(o, true) },
  "<i8": { size: 8, read: (v, o) => bigToNumber(v.getBigInt64(o, true)) },
  "|u1": { size: 1, read: (v, o) => v.getUint8(o) },
  "<u2": { size: 2, read: (v, o) => v.getUint16(o, true) },
  "<u4": { size: 4, read: (v, o) => v.getUint32(o, true) },
  "<u8": { size: 8, read: (v, o) => bigToNumber(v.getBigUint64(o, true)) },
};
// numpy writes "|i1"/"|u1" for single-byte dtypes but accept "<" too
DTYPES["<i1"] = DTYPES["|i1"];
DTYPES["<u1"] = DTYPES["|u1"];

function bigToNumber(value: bigint): number {
  if (value > 9007199254740991n || value < -9007199254740991n) {
    throw new IoError(`integer ${value} exceeds the safe float64 range`);
  }
  return Number(value);
}

export function parseNpy(buffer: Buffer, context: string): NpyArray {
  if (buffer.length < 10 || !buffer.subarray(0, 6).equals(MAGIC)) {
    throw new IoError(`${context}: not a .npy file (bad magic)`);
  }
  const major = buffer[6];
  let headerLen: number;
  let headerStart: number;
  if (major === 1) {
    headerLen = buffer.readUInt16LE(8);
    headerStart = 10;
  } else if (major === 2 || major === 3) {
    headerLen = buffer.readUInt32LE(8);
    headerStart = 12;
  } else {
    throw new IoError(`${context}: unsupported .npy version ${major}`);
  }
  const headerEnd = headerStart + headerLen;
  if (buffer.length < headerEnd) {
    throw new IoError(`${context}: truncated .npy header`);
  }
  const header = buffer.subarray(headerStart, headerEnd).toString("latin1");

  const descrMatch = header.match(/'descr':\s*'([^']+)'/);
  const orderMatch = header.match(/'fortran_order':\s*(True|False)/);
  const shapeMatch = header.match(/'shape':\s*\(([^)]*)\)/);
  if (!descrMatch || !orderMatch || !shapeMatch) {
    throw new IoError(`${context}: malformed .npy header: ${header.trim()}`);
  }
  const descr = descrMatch[1];
  if (orderMatch[1] === "True") {
    throw new IoError(
      `${context}: fortran-order arrays are not supported; ` +
      `re-save with ascontiguousarray`
    );
  }
  const dtype = DTYPES[descr];
  if (!dtype) {
    throw new IoError(
      `${context}: unsupported dtype ${descr}; ` +
      `supported: ${Object.keys(DTYPES).join(", ")}`
    );
  }

  const shape = shapeMatch[1]
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map((s) => {
      const n = Number(s);
      if (!Number.isInteger(n) || n < 0) {
        throw new IoError(`${context}: bad shape entry ${JSON.stringify(s)}`);
      }
      return n;
    });

  const count = shape.reduce((a, b) => a * b, 1);
  const expected = headerEnd + count * dtype.size;
  if (buffer.length !== expected) {
    throw new IoError(
      `${context}: data size ${buffer.length - headerEnd} does not match ` +
      `shape (${shape.join(", ")}) x itemsize ${dtype.size}`
    );
  }

  const view = new DataView(buffer.buffer, buffer.byteOffset + headerEnd);
  const data = new Float64Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = dtype.read(view, i * dtype.size);
  }
  return { descr, shape, data };
}

export function readNpyFile(path: string, fs: { readFileSync(p: string): Buffer }): NpyArray {
  let buffer: Buffer;
  try {
    buffer = fs.readFileSync(path);
  } catch (err) {
    throw new IoError(`cannot read ${path}: ${(err as Error).message}`);
  }
  return parseNpy(buffer, path);
}
