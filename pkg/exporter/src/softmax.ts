/** Row-wise softmax over a flat (E x M) float64 array. */

/**
 * Softmax with max-subtraction so large logits can't overflow exp.
 *
 * Returns a new array; each row of the result sums to 1 up to float64
 * rounding (far inside 1e-6).
 */
export function softmaxRows(logits: Float64Array, e: number, m: number): Float64Array {
  const out = new Float64Array(e * m);
  for (let row = 0; row < e; row++) {
    const offset = row * m;

    let max = -Infinity;
    for (let j = 0; j < m; j++) {
      if (logits[offset + j] > max) {
        max = logits[offset + j];
      }
    }

    let scale = 0;
    for (let j = 0; j < m; j++) {
      const value = Math.exp(logits[offset + j] - max);
      out[offset + j] = value;
      scale += value;
    }

    for (let j = 0; j < m; j++) {
      out[offset + j] /= scale;
    }
  }
  return out;
}

/** Sum of each row of a flat (E x M) array. */
export function rowSums(values: Float64Array, e: number, m: number): Float64Array {
  const sums = new Float64Array(e);
  for (let row = 0; row < e; row++) {
    let total = 0;
    for (let j = 0; j < m; j++) {
      total += values[row * m + j];
    }
    sums[row] = total;
  }
  return sums;
}
