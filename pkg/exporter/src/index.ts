export {
  ExportError,
  IoError,
  JobInvalid,
  RowSumOutOfTolerance,
  ShapeMismatch,
} from "./errors.js";
export { parseJob, type ClassifierSpec, type ExportJob } from "./job.js";
export { parseNpy, readNpyFile, type NpyArray } from "./npy.js";
export {
  decodePayload,
  encodePayload,
  HEADER_BYTES,
  MAGIC,
  type DecodedPayload,
} from "./payload.js";
export { rowSums, softmaxRows } from "./softmax.js";
export {
  ROW_SUM_TOLERANCE,
  runExport,
  type ExportOptions,
  type ExportResult,
} from "./export.js";
