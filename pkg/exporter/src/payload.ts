/**
 * The binary prediction payload: 8-byte magic, u64 LE example count,
 * u64 LE class count, then float32 LE values in example-major order.
 * File size is exactly 24 + 4*E*M bytes.
 */

import { IoError } from "./errors.js";

export const MAGIC = "XPLXPRD1";
export const HEADER_BYTES = 24;

/**
 * Quantize float64 values to float32 (round to nearest even, the same
 * conversion numpy's astype performs) and encode the payload.
 */
export function encodePayload(values: Float64Array, e: number, m: number): Buffer {
  if (values.length !== e * m) {
    throw new IoError(`payload needs ${e * m} values, got ${values.length}`);
  }
  const quantized = Float32Array.from(values);
  const buffer = Buffer.alloc(HEADER_BYTES + 4 * quantized.length);
  buffer.write(MAGIC, 0, "latin1");
  buffer.writeBigUInt64LE(BigInt(e), 8);
  buffer.writeBigUInt64LE(BigInt(m), 16);
  const view = new DataView(buffer.buffer, buffer.byteOffset + HEADER_BYTES);
  for (let i = 0; i < quantized.length; i++) {
    view.setFloat32(i * 4, quantized[i], true);
  }
  return buffer;
}

export interface DecodedPayload {
  e: number;
  m: number;
  data: Float32Array;
}

/** Strict inverse of encodePayload; used by the verification pass. */
export function decodePayload(buffer: Buffer, context: string): DecodedPayload {
  if (buffer.length < HEADER_BYTES) {
    throw new IoError(`${context}: shorter than the ${HEADER_BYTES}-byte header`);
  }
  const magic = buffer.subarray(0, 8).toString("latin1");
  if (magic !== MAGIC) {
    throw new IoError(`${context}: bad magic ${JSON.stringify(magic)}`);
  }
  const e = Number(buffer.readBigUInt64LE(8));
  const m = Number(buffer.readBigUInt64LE(16));
  if (buffer.length !== HEADER_BYTES + 4 * e * m) {
    throw new IoError(
      `${context}: size ${buffer.length} != ${HEADER_BYTES + 4 * e * m} for E=${e} M=${m}`
    );
  }
  const view = new DataView(buffer.buffer, buffer.byteOffset + HEADER_BYTES);
  const data = new Float32Array(e * m);
  for (let i = 0; i < data.length; i++) {
    data[i] = view.getFloat32(i * 4, true);
  }
  return { e, m, data };
}
