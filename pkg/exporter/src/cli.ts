#!/usr/bin/env node
/**
 * xplx-export <job.json> [--softmax]
 *
 * Reads a job description and writes the manifest + payloads + labels
 * layout. Paths in the job resolve relative to the job file. Exits 2
 * with a diagnostic on any validation failure, 3 on unexpected errors.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { pathToFileURL } from "node:url";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { ExportError, IoError, JobInvalid } from "./errors.js";
import { parseJob } from "./job.js";
import { runExport } from "./export.js";

export function main(argv: string[]): number {
  const args = yargs(argv)
    .scriptName("xplx-export")
    .usage("$0 <job> [--softmax]")
    .command("$0 <job>", "export prediction arrays to the analysis layout", (y) =>
      y.positional("job", {
        describe: "job description JSON file",
        type: "string",
        demandOption: true,
      })
    )
    .option("softmax", {
      type: "boolean",
      default: false,
      describe: "inputs are raw logits; convert rows to probabilities",
    })
    .strict()
    .exitProcess(false)
    .fail((msg) => {
      throw new JobInvalid(msg);
    })
    .help();

  try {
    const parsed = args.parseSync();
    const jobPath = parsed.job as string;
    let text: string;
    try {
      text = fs.readFileSync(jobPath, "utf8");
    } catch (err) {
      throw new IoError(`cannot read ${jobPath}: ${(err as Error).message}`);
    }
    let raw: unknown;
    try {
      raw = JSON.parse(text);
    } catch (err) {
      throw new JobInvalid(`${jobPath}: not valid JSON: ${(err as Error).message}`);
    }
    const job = parseJob(raw);
    const result = runExport(job, { softmax: parsed.softmax }, path.dirname(jobPath));
    process.stderr.write(
      `exported ${result.numClassifiers} classifiers, ` +
      `${result.numExamples} examples, ${result.numClasses} classes ` +
      `to ${path.dirname(result.manifestPath)}\n`
    );
    return 0;
  } catch (err) {
    if (err instanceof ExportError) {
      process.stderr.write(`error: ${err.name}: ${err.message}\n`);
      return 2;
    }
    process.stderr.write(`internal error: ${String(err)}\n`);
    return 3;
  }
}

// invoked as a script, not imported (realpath so bin symlinks count)
const invokedAs = process.argv[1]
  ? pathToFileURL(fs.realpathSync(process.argv[1])).href
  : "";
if (import.meta.url === invokedAs) {
  process.exit(main(hideBin(process.argv)));
}
