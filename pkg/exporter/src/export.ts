/**
 * Export job runner: dataset in, VEC1 vector file plus provenance
 * sidecar out. Output row order always equals dataset order, whatever
 * the batch size, and repeated runs of the same job are byte-identical.
 */

import { writeFileSync } from "node:fs";

import { splitCamelCase } from "./camel.js";
import { readDataset, type Field, type SkippedRow } from "./dataset.js";
import { makeEncoder, type Encoder } from "./encoders.js";
import { writeVec1, type Vec1Entry } from "./vec1.js";

export interface ExportJob {
  dataset: string;
  field: Field;
  encoder: string;
  out: string;
  maxLen?: number | null;
  batchSize?: number;
  /** Output dimension for the hash encoder; ignored by model encoders. */
  hashDim?: number;
}

export interface ExportResult {
  dim: number;
  count: number;
  skipped: SkippedRow[];
  maxLen: number | null;
}

function tokenize(field: Field, text: string): string[] {
  if (field === "code") {
    return splitCamelCase(text);
  }
  return text.split(/\s+/).filter(Boolean);
}

export async function runExport(job: ExportJob): Promise<ExportResult> {
  const encoder: Encoder = await makeEncoder(job.encoder, job.hashDim ?? 256);
  const maxLen = job.maxLen === undefined ? encoder.defaultMaxLen : job.maxLen;
  const batchSize = job.batchSize ?? 16;
  const { rows, skipped } = readDataset(job.dataset, job.field);

  const inputs = rows.map((row) => {
    const tokens = tokenize(job.field, row.text);
    return maxLen === null ? tokens : tokens.slice(0, maxLen);
  });

  const vectors: Float32Array[] = [];
  for (let start = 0; start < inputs.length; start += batchSize) {
    const batch = inputs.slice(start, start + batchSize);
    vectors.push(...(await encoder.encode(batch)));
  }

  if (vectors.length === 0) {
    throw new Error(`no encodable records in ${job.dataset} (field ${job.field})`);
  }
  const dim = vectors[0].length;
  const entries: Vec1Entry[] = rows.map((row, i) => ({
    id: row.id,
    values: vectors[i],
  }));
  writeFileSync(job.out, writeVec1(entries, dim));

  const provenance = {
    dataset: job.dataset,
    field: job.field,
    encoder: encoder.name,
    max_len: maxLen,
    dim,
    count: entries.length,
    skipped,
  };
  writeFileSync(`${job.out}.provenance.json`, JSON.stringify(provenance, null, 2) + "\n");
  return { dim, count: entries.length, skipped, maxLen };
}
