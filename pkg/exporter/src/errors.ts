/** Every deliberate failure raised by the exporter. */
export class ExportError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

/** Array dimensions disagree: not E x M, mixed shapes, labels off. */
export class ShapeMismatch extends ExportError {}

/** A probability row strays too far from summing to 1 (no --softmax). */
export class RowSumOutOfTolerance extends ExportError {}

/** File can't be read, written, or isn't what it claims to be. */
export class IoError extends ExportError {}

/** The job description itself is malformed. */
export class JobInvalid extends ExportError {}
