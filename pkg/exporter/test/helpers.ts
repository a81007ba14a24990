/** Build .npy buffers by hand so the parser is tested against the format spec. */

export function makeNpy(
  descr: string,
  shape: number[],
  payload: Buffer,
  fortranOrder = false,
): Buffer {
  const shapeText =
    shape.length === 1 ? `(${shape[0]},)` : `(${shape.join(", ")})`;
  let header =
    `{'descr': '${descr}', 'fortran_order': ${fortranOrder ? "True" : "False"}, ` +
    `'shape': ${shapeText}, }`;
  // pad with spaces so magic+version+len+header is a multiple of 64,
  // newline-terminated, as numpy writes it
  const unpadded = 10 + header.length + 1;
  header = header + " ".repeat((64 - (unpadded % 64)) % 64) + "\n";

  const head = Buffer.alloc(10);
  Buffer.from("\x93NUMPY", "latin1").copy(head, 0);
  head[6] = 1;
  head[7] = 0;
  head.writeUInt16LE(header.length, 8);
  return Buffer.concat([head, Buffer.from(header, "latin1"), payload]);
}

export function f64Npy(shape: number[], values: number[]): Buffer {
  const payload = Buffer.alloc(values.length * 8);
  values.forEach((v, i) => payload.writeDoubleLE(v, i * 8));
  return makeNpy("<f8", shape, payload);
}

export function f32Npy(shape: number[], values: number[]): Buffer {
  const payload = Buffer.alloc(values.length * 4);
  values.forEach((v, i) => payload.writeFloatLE(Math.fround(v), i * 4));
  return makeNpy("<f4", shape, payload);
}

export function i64Npy(shape: number[], values: number[]): Buffer {
  const payload = Buffer.alloc(values.length * 8);
  values.forEach((v, i) => payload.writeBigInt64LE(BigInt(v), i * 8));
  return makeNpy("<i8", shape, payload);
}
