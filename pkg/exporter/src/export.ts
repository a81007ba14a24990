/**
 * Orchestration: read saved arrays, validate, optionally softmax,
 * quantize to float32, write the manifest + payload + labels layout,
 * then re-read every payload and prove the round trip.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { IoError, RowSumOutOfTolerance, ShapeMismatch } from "./errors.js";
import type { ExportJob } from "./job.js";
import { readNpyFile, type NpyArray } from "./npy.js";
import { decodePayload, encodePayload } from "./payload.js";
import { softmaxRows, rowSums } from "./softmax.js";

// matches the tolerance the ingesting tool enforces at load time
export const ROW_SUM_TOLERANCE = 1e-3;

export interface ExportOptions {
  /** treat inputs as raw logits and convert rows to probabilities */
  softmax?: boolean;
}

export interface ExportResult {
  manifestPath: string;
  labelsPath: string;
  payloadPaths: string[];
  numClassifiers: number;
  numExamples: number;
  numClasses: number;
}

function loadPredictions(filePath: string): { e: number; m: number; data: Float64Array } {
  const arr = readNpyFile(filePath, fs);
  if (arr.shape.length !== 2) {
    throw new ShapeMismatch(
      `${filePath}: predictions must be 2-D (examples x classes), ` +
      `got shape (${arr.shape.join(", ")})`
    );
  }
  const [e, m] = arr.shape;
  if (e === 0 || m === 0) {
    throw new ShapeMismatch(`${filePath}: empty array of shape (${e}, ${m})`);
  }
  return { e, m, data: arr.data };
}

function loadLabels(filePath: string, e: number, m: number): number[] {
  const arr: NpyArray = readNpyFile(filePath, fs);
  if (arr.shape.length !== 1) {
    throw new ShapeMismatch(
      `${filePath}: labels must be 1-D, got shape (${arr.shape.join(", ")})`
    );
  }
  if (arr.shape[0] !== e) {
    throw new ShapeMismatch(
      `${filePath}: ${arr.shape[0]} labels for ${e} examples`
    );
  }
  const labels: number[] = [];
  for (let i = 0; i < arr.data.length; i++) {
    const v = arr.data[i];
    if (!Number.isInteger(v)) {
      throw new ShapeMismatch(`${filePath}: label at index ${i} is ${v}, not an integer`);
    }
    if (v < 0 || v >= m) {
      throw new ShapeMismatch(
        `${filePath}: label ${v} at index ${i} outside [0, ${m})`
      );
    }
    labels.push(v);
  }
  return labels;
}

function checkRowSums(data: Float64Array, e: number, m: number, context: string): void {
  const sums = rowSums(data, e, m);
  for (let row = 0; row < e; row++) {
    if (!Number.isFinite(sums[row]) || Math.abs(sums[row] - 1.0) > ROW_SUM_TOLERANCE) {
      throw new RowSumOutOfTolerance(
        `${context}: row ${row} sums to ${sums[row]}; ` +
        `pass --softmax if these are raw logits`
      );
    }
  }
}

function writeFileChecked(filePath: string, content: Buffer | string): void {
  try {
    fs.writeFileSync(filePath, content);
  } catch (err) {
    throw new IoError(`cannot write ${filePath}: ${(err as Error).message}`);
  }
}

/**
 * Run one export job. Paths inside the job resolve relative to
 * `baseDir` (the job file's directory, for the CLI).
 */
export function runExport(
  job: ExportJob,
  options: ExportOptions = {},
  baseDir: string = ".",
): ExportResult {
  const resolve = (p: string) => path.resolve(baseDir, p);
  const outDir = resolve(job.out_dir);

  // load everything and settle the shared dimensions before writing
  let e = -1;
  let m = -1;
  const blocks: Float64Array[] = [];
  for (const clf of job.classifiers) {
    const arrayPath = resolve(clf.array_file);
    const block = loadPredictions(arrayPath);
    if (e === -1) {
      e = block.e;
      m = block.m;
    } else if (block.e !== e || block.m !== m) {
      throw new ShapeMismatch(
        `${arrayPath}: shape (${block.e}, ${block.m}) disagrees with ` +
        `(${e}, ${m}) from ${job.classifiers[0].array_file}`
      );
    }
    let data = block.data;
    if (options.softmax) {
      data = softmaxRows(data, e, m);
    } else {
      checkRowSums(data, e, m, arrayPath);
    }
    blocks.push(data);
  }
  const labels = loadLabels(resolve(job.labels_file), e, m);

  try {
    fs.mkdirSync(outDir, { recursive: true });
  } catch (err) {
    throw new IoError(`cannot create ${outDir}: ${(err as Error).message}`);
  }

  const payloadPaths: string[] = [];
  const written: Buffer[] = [];
  for (let i = 0; i < job.classifiers.length; i++) {
    const encoded = encodePayload(blocks[i], e, m);
    const payloadPath = path.join(outDir, `${job.classifiers[i].id}.prd`);
    writeFileChecked(payloadPath, encoded);
    payloadPaths.push(payloadPath);
    written.push(encoded);
  }

  const manifest = {
    num_classes: m,
    num_examples: e,
    classifiers: job.classifiers.map((clf) => ({
      id: clf.id,
      architecture: clf.architecture,
      train_fraction: clf.train_fraction,
      epoch_stage: clf.epoch_stage,
      payload: `${clf.id}.prd`,
    })),
  };
  const manifestPath = path.join(outDir, "manifest.json");
  writeFileChecked(manifestPath, JSON.stringify(manifest, null, 2) + "\n");

  const labelsPath = path.join(outDir, "labels.txt");
  writeFileChecked(labelsPath, labels.join("\n") + "\n");

  // verification pass: every payload must read back bit-exact
  for (let i = 0; i < payloadPaths.length; i++) {
    let readBack: Buffer;
    try {
      readBack = fs.readFileSync(payloadPaths[i]);
    } catch (err) {
      throw new IoError(
        `verification: cannot re-read ${payloadPaths[i]}: ${(err as Error).message}`
      );
    }
    if (!readBack.equals(written[i])) {
      throw new IoError(`verification: ${payloadPaths[i]} does not match what was written`);
    }
    const decoded = decodePayload(readBack, payloadPaths[i]);
    const expected = Float32Array.from(blocks[i]);
    if (decoded.e !== e || decoded.m !== m) {
      throw new IoError(`verification: ${payloadPaths[i]} header dims changed`);
    }
    for (let k = 0; k < expected.length; k++) {
      if (!Object.is(decoded.data[k], expected[k])) {
        throw new IoError(
          `verification: ${payloadPaths[i]} value ${k} is ${decoded.data[k]}, ` +
          `expected ${expected[k]}`
        );
      }
    }
  }

  return {
    manifestPath,
    labelsPath,
    payloadPaths,
    numClassifiers: job.classifiers.length,
    numExamples: e,
    numClasses: m,
  };
}
