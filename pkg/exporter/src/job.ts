/** Job description: what to export, from where, to where. */

import { z } from "zod";

import { JobInvalid } from "./errors.js";

// vocabulary fixed by the manifest format the analysis tool ingests
const TRAIN_FRACTIONS = [0.25, 0.5, 0.75, 1.0] as const;
const EPOCH_STAGES = ["early-1", "early-2", "early-3", "early-4", "converged"] as const;

const classifierSchema = z.object({
  id: z.string().min(1).regex(/^[^/\\]+$/, "id must not contain path separators"),
  architecture: z.string().min(1),
  train_fraction: z.union([
    z.number().refine(
      (v) => (TRAIN_FRACTIONS as readonly number[]).includes(v),
      `train_fraction must be one of ${TRAIN_FRACTIONS.join(", ")} or "synthetic"`,
    ),
    z.literal("synthetic"),
  ]),
  epoch_stage: z.enum(EPOCH_STAGES),
  array_file: z.string().min(1),
});

const jobSchema = z.object({
  classifiers: z.array(classifierSchema).min(1),
  labels_file: z.string().min(1),
  out_dir: z.string().min(1),
});

export type ClassifierSpec = z.infer<typeof classifierSchema>;
export type ExportJob = z.infer<typeof jobSchema>;

export function parseJob(raw: unknown): ExportJob {
  const result = jobSchema.safeParse(raw);
  if (!result.success) {
    const issue = result.error.issues[0];
    const where = issue.path.length ? ` at ${issue.path.join(".")}` : "";
    throw new JobInvalid(`job description${where}: ${issue.message}`);
  }
  const job = result.data;
  const seen = new Set<string>();
  for (const clf of job.classifiers) {
    if (seen.has(clf.id)) {
      throw new JobInvalid(`duplicate classifier id ${JSON.stringify(clf.id)}`);
    }
    seen.add(clf.id);
  }
  return job;
}
