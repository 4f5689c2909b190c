/**
 * Minimal JSONL dataset reader: the exporter only needs the record id
 * and the field being encoded. Records it cannot encode are skipped and
 * logged, never silently dropped.
 */

import { readFileSync } from "node:fs";

export type Field = "code" | "description";

export interface DatasetRow {
  id: string;
  text: string;
}

export interface SkippedRow {
  line: number;
  id?: string;
  reason: string;
}

export interface DatasetRead {
  rows: DatasetRow[];
  skipped: SkippedRow[];
}

export function readDataset(path: string, field: Field): DatasetRead {
  const rows: DatasetRow[] = [];
  const skipped: SkippedRow[] = [];
  const seen = new Set<string>();
  const lines = readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, index) => {
    if (!line.trim()) {
      return;
    }
    const lineno = index + 1;
    let raw: Record<string, unknown>;
    try {
      raw = JSON.parse(line);
    } catch (error) {
      skipped.push({ line: lineno, reason: `malformed-json: ${error}` });
      return;
    }
    const id = typeof raw.id === "string" ? raw.id : undefined;
    if (!id) {
      skipped.push({ line: lineno, reason: "missing-id" });
      return;
    }
    if (seen.has(id)) {
      skipped.push({ line: lineno, id, reason: "duplicate-id" });
      return;
    }
    const value = raw[field];
    if (typeof value !== "string" || !value.trim()) {
      skipped.push({ line: lineno, id, reason: `empty-${field}` });
      return;
    }
    seen.add(id);
    rows.push({ id, text: value });
  });
  return { rows, skipped };
}
