import { describe, expect, it } from "vitest";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { SchemaError } from "../src/errors.js";
import { loadSpec } from "../src/schema.js";

function specFile(doc: unknown): string {
  const dir = mkdtempSync(join(tmpdir(), "figures-"));
  const path = join(dir, "spec.json");
  writeFileSync(path, typeof doc === "string" ? doc : JSON.stringify(doc));
  return path;
}

describe("figure spec validation", () => {
  it("accepts a minimal valid spec", () => {
    const spec = loadSpec(
      specFile({ figure: "error-scaling", records: [{ path: "a.csv" }] }),
    );
    expect(spec.figure).toBe("error-scaling");
    expect(spec.records).toHaveLength(1);
  });

  it("rejects an unknown figure id with its location", () => {
    const path = specFile({ figure: "pie-chart", records: [{ path: "a.csv" }] });
    expect(() => loadSpec(path)).toThrow(SchemaError);
    expect(() => loadSpec(path)).toThrow(/figure/);
  });

  it("rejects an empty record list", () => {
    expect(() => loadSpec(specFile({ figure: "error-scaling", records: [] }))).toThrow(
      /records/,
    );
  });

  it("rejects invalid json", () => {
    expect(() => loadSpec(specFile("{not json"))).toThrow(/not valid JSON/);
  });

  it("rejects a bad scale value", () => {
    const path = specFile({
      figure: "information-vs-time",
      records: [{ path: "a.csv" }],
      xScale: "cubic",
    });
    expect(() => loadSpec(path)).toThrow(/xScale/);
  });
});
