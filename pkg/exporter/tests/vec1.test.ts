import { describe, expect, it } from "vitest";

import { readVec1, writeVec1 } from "../src/vec1.js";

describe("VEC1 format", () => {
  it("round-trips entries bit-for-bit", () => {
    const entries = [
      { id: "alpha", values: new Float32Array([1.5, -2.25, 0.125]) },
      { id: "beta", values: new Float32Array([0, 3.5, -1]) },
    ];
    const buffer = writeVec1(entries, 3);
    const back = readVec1(buffer);
    expect(back.dim).toBe(3);
    expect(back.entries.map((e) => e.id)).toEqual(["alpha", "beta"]);
    expect(Array.from(back.entries[0].values)).toEqual([1.5, -2.25, 0.125]);
    expect(writeVec1(back.entries, back.dim).equals(buffer)).toBe(true);
  });

  it("produces the exact documented byte layout", () => {
    const buffer = writeVec1([{ id: "ab", values: new Float32Array([1.0]) }], 1);
    const expected = Buffer.concat([
      Buffer.from("VEC1", "ascii"),
      Buffer.from([1, 0, 0, 0]), // dim u32 LE
      Buffer.from([1, 0, 0, 0, 0, 0, 0, 0]), // count u64 LE
      Buffer.from([2, 0]), // id length u16 LE
      Buffer.from("ab", "utf-8"),
      Buffer.from([0, 0, 0x80, 0x3f]), // 1.0f LE
    ]);
    expect(buffer.equals(expected)).toBe(true);
  });

  it("rejects wrong-length vectors", () => {
    expect(() =>
      writeVec1([{ id: "a", values: new Float32Array([1, 2]) }], 3),
    ).toThrow(/length 2/);
  });

  it("rejects bad magic and truncation", () => {
    expect(() => readVec1(Buffer.from("NOPE00000000OOOO"))).toThrow(/magic/);
    const good = writeVec1([{ id: "a", values: new Float32Array([1, 2]) }], 2);
    expect(() => readVec1(good.subarray(0, good.length - 3))).toThrow(/truncated/);
    expect(() => readVec1(Buffer.concat([good, Buffer.from([1])]))).toThrow(/trailing/);
  });
});
