import { describe, expect, it } from "vitest";

import { splitCamelCase } from "../src/camel.js";

describe("splitCamelCase", () => {
  it("splits lower-to-upper boundaries", () => {
    expect(splitCamelCase("getUserName")).toEqual(["get", "User", "Name"]);
  });

  it("splits acronym-to-word and letter-digit boundaries", () => {
    expect(splitCamelCase("HTTPServer2")).toEqual(["HTTP", "Server", "2"]);
  });

  it("treats non-identifier characters as separators", () => {
    expect(splitCamelCase("foo_bar(x)")).toEqual(["foo", "bar", "x"]);
  });

  it("returns empty for empty input", () => {
    expect(splitCamelCase("")).toEqual([]);
  });

  it("never yields empty tokens and preserves characters", () => {
    const samples = ["parseHTTPResponse", "a1B2c3", "__init__", "x->yZ"];
    for (const sample of samples) {
      const tokens = splitCamelCase(sample);
      expect(tokens.every((t) => t.length > 0)).toBe(true);
      expect(tokens.join("")).toBe(sample.replace(/[^A-Za-z0-9]/g, ""));
    }
  });
});
