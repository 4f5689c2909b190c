#!/usr/bin/env node
/**
 * embed-exporter CLI.
 *
 *   embed-exporter export --dataset data.jsonl --field code \
 *       --encoder hash --out code.vec [--max-len N] [--dim D] [--batch-size B]
 *
 * Encoders: "hash" (deterministic feature hashing, offline) or any
 * pretrained model id served by @xenova/transformers.
 */

import { realpathSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { parseArgs } from "node:util";

import { runExport } from "./export.js";
import type { Field } from "./dataset.js";

function usage(message?: string): never {
  if (message) {
    console.error(`error: ${message}`);
  }
  console.error(
    "usage: embed-exporter export --dataset PATH --field {code,description} " +
      "--encoder NAME --out PATH [--max-len N] [--dim D] [--batch-size B]",
  );
  process.exit(2);
}

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  if (command !== "export") {
    usage(command ? `unknown command ${command}` : "missing command");
  }
  let parsed;
  try {
    parsed = parseArgs({
      args: rest,
      options: {
        dataset: { type: "string" },
        field: { type: "string" },
        encoder: { type: "string" },
        out: { type: "string" },
        "max-len": { type: "string" },
        dim: { type: "string" },
        "batch-size": { type: "string" },
      },
    });
  } catch (error) {
    usage(String(error));
  }
  const values = parsed.values;
  if (!values.dataset || !values.field || !values.encoder || !values.out) {
    usage("--dataset, --field, --encoder and --out are required");
  }
  if (values.field !== "code" && values.field !== "description") {
    usage(`--field must be code or description, got ${values.field}`);
  }
  try {
    const result = await runExport({
      dataset: values.dataset,
      field: values.field as Field,
      encoder: values.encoder,
      out: values.out,
      maxLen: values["max-len"] === undefined ? undefined : Number(values["max-len"]),
      hashDim: values.dim === undefined ? undefined : Number(values.dim),
      batchSize:
        values["batch-size"] === undefined ? undefined : Number(values["batch-size"]),
    });
    console.log(
      `wrote ${values.out}: dim=${result.dim} count=${result.count} ` +
        `skipped=${result.skipped.length}`,
    );
    return 0;
  } catch (error) {
    console.error(`error: ${error instanceof Error ? error.message : error}`);
    return 1;
  }
}

function invokedDirectly(): boolean {
  if (!process.argv[1]) {
    return false;
  }
  try {
    // realpath resolves npm bin symlinks back to dist/cli.js
    return fileURLToPath(import.meta.url) === realpathSync(process.argv[1]);
  } catch {
    return false;
  }
}

if (invokedDirectly()) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
