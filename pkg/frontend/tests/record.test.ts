import { describe, expect, it } from "vitest";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { RefusalError, SchemaError } from "../src/errors.js";
import { constantNumber, numbers, readRecord, requireColumns } from "../src/record.js";

const GOLDEN = fileURLToPath(new URL("./golden", import.meta.url));

describe("csv dialect", () => {
  it("parses comments, header, and typed cells", () => {
    const rec = readRecord(join(GOLDEN, "cfi_wo.csv"));
    expect(rec.metadata["experiment"]).toBe("cfi-sweep");
    expect(rec.metadata["seed"]).toBe("11");
    expect(rec.metadata["units"]).toBe("seconds, rad/s");
    expect(rec.columns.slice(0, 3)).toEqual(["g", "tau", "T"]);
    expect(rec.rows).toHaveLength(7);
    // full repr precision survives the round trip
    expect(rec.rows[0]["cfi"]).toBe(0.2646430126927053);
    expect(rec.rows[0]["mode"]).toBe("weak_only");
    expect(rec.rows[0]["qfi"]).toBe(4.0);
  });

  it("reads the json mirror to the identical typed table", () => {
    const csv = readRecord(join(GOLDEN, "seq_ws.csv"));
    const json = readRecord(join(GOLDEN, "seq_ws.json"));
    expect(json.columns).toEqual(csv.columns);
    expect(json.rows).toEqual(csv.rows);
    expect(json.metadata["experiment"]).toBe(csv.metadata["experiment"]);
    expect(json.metadata["config_hash"]).toBe(csv.metadata["config_hash"]);
  });

  it("types booleans in cascaded records", () => {
    const rec = readRecord(join(GOLDEN, "casc.csv"));
    expect(rec.rows[0]["degenerate"]).toBe(false);
    const json = readRecord(join(GOLDEN, "casc.json"));
    expect(json.rows).toEqual(rec.rows);
  });

  it("refuses a record with no data rows", () => {
    const dir = mkdtempSync(join(tmpdir(), "figures-"));
    const path = join(dir, "empty.csv");
    writeFileSync(path, "# weakclock 0.1.0\n# experiment: oci\ng,tau,T\n");
    expect(() => readRecord(path)).toThrow(RefusalError);
    expect(() => readRecord(path)).toThrow(/no data rows/);
  });

  it("names the missing column", () => {
    const rec = readRecord(join(GOLDEN, "oci.csv"));
    expect(() => requireColumns(rec, ["bmse_min", "no_such_column"])).toThrow(
      /missing column 'no_such_column'/,
    );
  });

  it("rejects non-numeric cells where numbers are needed", () => {
    const rec = readRecord(join(GOLDEN, "cfi_wo.csv"));
    expect(() => numbers(rec, "mode")).toThrow(SchemaError);
  });

  it("rejects a varying parameter column for overlays", () => {
    const rec = readRecord(join(GOLDEN, "cfi_wo.csv"));
    expect(constantNumber(rec, "g")).toBe(0.1);
    expect(() => constantNumber(rec, "T")).toThrow(/varies across rows/);
  });
});
