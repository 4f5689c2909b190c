/**
 * Round-trip against the consuming pipeline: exported VEC1 files must
 * load in the Python package with matching dim and count. Runs the real
 * CLI of the consumer; skipped only when that package is not installed.
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { runExport } from "../src/export.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURE_CORPUS = join(HERE, "..", "..", "tests", "fixtures", "fixture_corpus.jsonl");

function consumerAvailable(): boolean {
  try {
    execFileSync("python3", ["-c", "import vulnsev"], { stdio: "ignore" });
    return true;
  } catch {
    return false;
  }
}

describe.skipIf(!consumerAvailable())("consumer round-trip", () => {
  it("exported vectors load with matching dim and count", async () => {
    const dir = mkdtempSync(join(tmpdir(), "roundtrip-"));
    const codeOut = join(dir, "code.vec");
    const descOut = join(dir, "desc.vec");
    const code = await runExport({
      dataset: FIXTURE_CORPUS,
      field: "code",
      encoder: "hash",
      out: codeOut,
      hashDim: 32,
    });
    const desc = await runExport({
      dataset: FIXTURE_CORPUS,
      field: "description",
      encoder: "hash",
      out: descOut,
      hashDim: 24,
    });
    expect(code.count).toBe(50);
    expect(desc.count).toBe(50);

    const stdout = execFileSync(
      "python3",
      [
        "-m", "vulnsev", "index",
        "--dataset", FIXTURE_CORPUS,
        "--code-vectors", codeOut,
        "--desc-vectors", descOut,
      ],
      { encoding: "utf-8" },
    );
    expect(stdout).toContain("code: dim=32 count=50 covered=50/50");
    expect(stdout).toContain("description: dim=24 count=50 covered=50/50");
  });

  it("repeated export of the fixture corpus is byte-identical", async () => {
    const dir = mkdtempSync(join(tmpdir(), "determinism-"));
    const { readFileSync } = await import("node:fs");
    const outs = [join(dir, "one.vec"), join(dir, "two.vec")];
    for (const out of outs) {
      await runExport({
        dataset: FIXTURE_CORPUS,
        field: "code",
        encoder: "hash",
        out,
        hashDim: 32,
      });
    }
    expect(readFileSync(outs[0]).equals(readFileSync(outs[1]))).toBe(true);
  });
});
