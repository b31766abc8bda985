import { describe, expect, it } from "vitest";
import { createHash } from "node:crypto";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { run } from "../src/cli.js";
import { RefusalError, SchemaError } from "../src/errors.js";
import { renderFigure } from "../src/figures.js";
import { fitWeakOnly, fitWeakWithStrong } from "../src/overlays.js";
import { numbers, readRecord } from "../src/record.js";
import { FigureSpec } from "../src/schema.js";

const GOLDEN = fileURLToPath(new URL("./golden", import.meta.url));

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "figures-"));
}

function specIn(dir: string, doc: FigureSpec): string {
  const path = join(dir, "spec.json");
  writeFileSync(path, JSON.stringify(doc));
  return path;
}

function golden(name: string): string {
  return join(GOLDEN, name);
}

const FIG2: FigureSpec = {
  figure: "information-vs-time",
  records: [
    { path: golden("cfi_wo.csv"), label: "weak only" },
    { path: golden("cfi_ws.csv"), label: "weak with strong" },
  ],
};

const FIG3A: FigureSpec = {
  figure: "convergence-vs-time",
  records: [{ path: golden("bmse_n4.csv") }, { path: golden("bmse_n64.csv") }],
};

const FIG3B: FigureSpec = {
  figure: "error-scaling",
  records: [
    { path: golden("seq_ws.csv"), label: "sequential" },
    { path: golden("casc.csv"), label: "cascaded" },
    { path: golden("oci.csv"), label: "interferometer bound" },
  ],
};

function render(doc: FigureSpec): string {
  return renderFigure(doc, specIn(tmp(), doc));
}

function sha(text: string): string {
  return createHash("sha256").update(text).digest("hex").slice(0, 16);
}

describe("figure rendering", () => {
  it("renders the information figure byte-reproducibly", () => {
    const first = render(FIG2);
    const second = render(FIG2);
    expect(first).toBe(second);
    expect(first.startsWith("<svg")).toBe(true);
    expect(first).toContain("weak only");
    expect(first).toContain("quantum limit");
    // frozen against the committed golden records
    expect(sha(first)).toBe("7a02dc2198ca372d");
  });

  it("renders the convergence figure byte-reproducibly", () => {
    const first = render(FIG3A);
    expect(first).toBe(render(FIG3A));
    expect(first).toContain("N = 4");
    expect(first).toContain("N = 64");
    expect(sha(first)).toBe("e755941805275355");
  });

  it("renders the error-scaling figure with the phase-slip marker", () => {
    const first = render(FIG3B);
    expect(first).toBe(render(FIG3B));
    expect(first).toContain("T = pi/delta_omega");
    expect(first).toContain("prior width");
    expect(sha(first)).toBe("8caf8660882e6c04");
  });

  it("renders identically from the csv and json mirrors", () => {
    const fromJson: FigureSpec = {
      ...FIG3B,
      records: FIG3B.records.map((r) => ({ ...r, path: r.path.replace(".csv", ".json") })),
    };
    expect(render(fromJson)).toBe(render(FIG3B));
  });

  it("recomputes fit overlays that agree with the record's own fit column", () => {
    for (const [name, fit] of [
      ["cfi_wo.csv", fitWeakOnly],
      ["cfi_ws.csv", fitWeakWithStrong],
    ] as const) {
      const rec = readRecord(golden(name));
      const T = numbers(rec, "T");
      const recorded = numbers(rec, "fit");
      T.forEach((t, i) => {
        expect(fit(0.1, 0.1, t, 1)).toBeCloseTo(recorded[i], 9);
      });
    }
  });
});

describe("fail-closed inputs", () => {
  it("names a deleted column", () => {
    const dir = tmp();
    const lines = readFileSync(golden("cfi_wo.csv"), "utf8").split("\n");
    // drop the qfi column (index 10) from header and rows
    const tampered = lines
      .map((line) =>
        line.startsWith("#") || line === ""
          ? line
          : line.split(",").filter((_, i) => i !== 10).join(","),
      )
      .join("\n");
    const recPath = join(dir, "tampered.csv");
    writeFileSync(recPath, tampered);
    const doc: FigureSpec = {
      figure: "information-vs-time",
      records: [{ path: recPath }],
    };
    expect(() => renderFigure(doc, specIn(dir, doc))).toThrow(SchemaError);
    expect(() => renderFigure(doc, specIn(dir, doc))).toThrow(/missing column 'qfi'/);
  });

  it("refuses a record with no data rows", () => {
    const dir = tmp();
    const headerOnly = readFileSync(golden("oci.csv"), "utf8")
      .split("\n")
      .filter((line) => line.startsWith("#") || line.startsWith("g,"))
      .join("\n");
    const recPath = join(dir, "empty.csv");
    writeFileSync(recPath, headerOnly);
    const doc: FigureSpec = { figure: "error-scaling", records: [{ path: recPath }] };
    expect(() => renderFigure(doc, specIn(dir, doc))).toThrow(RefusalError);
  });

  it("rejects a record from the wrong experiment", () => {
    const doc: FigureSpec = {
      figure: "information-vs-time",
      records: [{ path: golden("oci.csv") }],
    };
    expect(() => renderFigure(doc, specIn(tmp(), doc))).toThrow(/needs cfi-sweep/);
  });
});

describe("cli", () => {
  it("renders a spec to the given output path", () => {
    const dir = tmp();
    const specPath = specIn(dir, FIG2);
    const out = join(dir, "fig2.svg");
    expect(run(["render", specPath, "--out", out])).toBe(0);
    expect(readFileSync(out, "utf8")).toBe(render(FIG2));
  });

  it("exits 2 on schema violations", () => {
    const dir = tmp();
    const bad = join(dir, "bad.json");
    writeFileSync(bad, JSON.stringify({ figure: "nope", records: [{ path: "x.csv" }] }));
    expect(run(["render", bad, "--out", join(dir, "o.svg")])).toBe(2);
  });

  it("exits 3 when refusing an empty record", () => {
    const dir = tmp();
    const headerOnly = readFileSync(golden("oci.csv"), "utf8")
      .split("\n")
      .filter((line) => line.startsWith("#") || line.startsWith("g,"))
      .join("\n");
    const recPath = join(dir, "empty.csv");
    writeFileSync(recPath, headerOnly);
    const doc: FigureSpec = { figure: "error-scaling", records: [{ path: recPath }] };
    expect(run(["render", specIn(dir, doc), "--out", join(dir, "o.svg")])).toBe(3);
  });
});
