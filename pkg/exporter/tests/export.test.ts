import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { beforeAll, describe, expect, it } from "vitest";

import { hashEncoder } from "../src/encoders.js";
import { runExport } from "../src/export.js";
import { readVec1 } from "../src/vec1.js";

let dir: string;
let dataset: string;

const RECORDS = [
  {
    id: "r-1",
    cve_id: "CVE-1",
    code: "int parseHeader(char *buf) { return buf[0]; }",
    description: "A heap overflow in the parser.",
    cvss_score: 7.5,
  },
  {
    id: "r-2",
    cve_id: "CVE-2",
    code: "void resetCounters(void) { counter = 0; }",
    description: "A race condition in the scheduler.",
    cvss_score: 5.0,
  },
  {
    id: "r-3",
    cve_id: "CVE-3",
    code: "size_t safeAdd(size_t a, size_t b) { return a + b; }",
    description: "Integer overflow on 32-bit builds.",
    cvss_score: 9.1,
  },
  {
    id: "r-4",
    cve_id: "CVE-4",
    code: "int ok(void) { return 1; }",
    description: "   ",
    cvss_score: 3.0,
  },
];

beforeAll(() => {
  dir = mkdtempSync(join(tmpdir(), "exporter-"));
  dataset = join(dir, "data.jsonl");
  writeFileSync(dataset, RECORDS.map((r) => JSON.stringify(r)).join("\n") + "\n");
});

describe("hash encoder", () => {
  it("is deterministic and unit-normalized", async () => {
    const encoder = hashEncoder(32);
    const [first] = await encoder.encode([["get", "User", "Name"]]);
    const [second] = await encoder.encode([["get", "User", "Name"]]);
    expect(Array.from(first)).toEqual(Array.from(second));
    const norm = Math.sqrt(first.reduce((acc, v) => acc + v * v, 0));
    expect(norm).toBeCloseTo(1.0, 6);
  });

  it("never emits a zero vector for non-empty input", async () => {
    const encoder = hashEncoder(8);
    const [vector] = await encoder.encode([["solo"]]);
    expect(vector.some((v) => v !== 0)).toBe(true);
  });
});

describe("runExport", () => {
  it("writes one row per encodable record, skipping empty fields", async () => {
    const out = join(dir, "desc.vec");
    const result = await runExport({
      dataset,
      field: "description",
      encoder: "hash",
      out,
      hashDim: 16,
    });
    expect(result.count).toBe(3);
    expect(result.skipped).toEqual([
      { line: 4, id: "r-4", reason: "empty-description" },
    ]);
    const parsed = readVec1(readFileSync(out));
    expect(parsed.dim).toBe(16);
    expect(parsed.entries.map((e) => e.id)).toEqual(["r-1", "r-2", "r-3"]);
  });

  it("is byte-identical across repeated runs", async () => {
    const first = join(dir, "a.vec");
    const second = join(dir, "b.vec");
    for (const out of [first, second]) {
      await runExport({ dataset, field: "code", encoder: "hash", out, hashDim: 24 });
    }
    expect(readFileSync(first).equals(readFileSync(second))).toBe(true);
    expect(readFileSync(`${first}.provenance.json`, "utf-8")).toBe(
      readFileSync(`${second}.provenance.json`, "utf-8"),
    );
  });

  it("keeps dataset order regardless of batch size", async () => {
    const bulk = join(dir, "bulk.vec");
    const tiny = join(dir, "tiny.vec");
    await runExport({ dataset, field: "code", encoder: "hash", out: bulk, hashDim: 8 });
    await runExport({
      dataset,
      field: "code",
      encoder: "hash",
      out: tiny,
      hashDim: 8,
      batchSize: 1,
    });
    expect(readFileSync(bulk).equals(readFileSync(tiny))).toBe(true);
  });

  it("records provenance including the token cap", async () => {
    const out = join(dir, "capped.vec");
    await runExport({
      dataset,
      field: "code",
      encoder: "hash",
      out,
      hashDim: 8,
      maxLen: 4,
    });
    const sidecar = JSON.parse(readFileSync(`${out}.provenance.json`, "utf-8"));
    expect(sidecar.max_len).toBe(4);
    expect(sidecar.encoder).toBe("hash-8");
    expect(sidecar.count).toBe(4);
  });

  it("fails loudly when a model encoder is unavailable", async () => {
    await expect(
      runExport({
        dataset,
        field: "code",
        encoder: "no-such/model",
        out: join(dir, "never.vec"),
      }),
    ).rejects.toThrow(/@xenova\/transformers/);
  });
});
