import { dirname, resolve } from "node:path";
import { SchemaError } from "./errors.js";
import { fitFor, logGrid, qfi } from "./overlays.js";
import { constantNumber, constantString, numbers, readRecord, RunRecord } from "./record.js";
import { FigureSpec, RecordRef } from "./schema.js";
import { FigureData, PALETTE, renderSvg, Series } from "./svg.js";

const GREY = "#666666";

function loadRecords(spec: FigureSpec, specPath: string): { ref: RecordRef; rec: RunRecord }[] {
  const base = dirname(resolve(specPath));
  return spec.records.map((ref) => ({ ref, rec: readRecord(resolve(base, ref.path)) }));
}

function experimentOf(rec: RunRecord): string {
  const exp = rec.metadata["experiment"];
  if (!exp) {
    throw new SchemaError(`record ${rec.path} carries no experiment metadata`);
  }
  return exp;
}

function requireExperiment(rec: RunRecord, expected: string): void {
  const exp = experimentOf(rec);
  if (exp !== expected) {
    throw new SchemaError(
      `record ${rec.path} is a ${exp} record; this figure needs ${expected}`,
    );
  }
}

/** CFI normalized by the quantum limit vs T, one curve and one recomputed
 * fit overlay per record. */
function informationVsTime(spec: FigureSpec, specPath: string): FigureData {
  const series: Series[] = [];
  loadRecords(spec, specPath).forEach(({ ref, rec }, i) => {
    requireExperiment(rec, "cfi-sweep");
    const T = numbers(rec, "T");
    const cfi = numbers(rec, "cfi");
    const stderr = numbers(rec, "stderr");
    const qfiCol = numbers(rec, "qfi");
    const g = constantNumber(rec, "g");
    const tau = constantNumber(rec, "tau");
    const N = constantNumber(rec, "N");
    const mode = constantString(rec, "mode");
    const color = PALETTE[i % PALETTE.length];
    series.push({
      label: ref.label ?? mode.replace("_", " "),
      color,
      x: T,
      y: cfi.map((v, k) => v / qfiCol[k]),
      yerr: stderr.map((v, k) => v / qfiCol[k]),
      markers: true,
    });
    const dense = logGrid(Math.min(...T), Math.max(...T));
    series.push({
      label: "",
      color,
      dashed: true,
      x: dense,
      y: dense.map((t) => fitFor(mode, g, tau, t, N) / qfi(N, t)),
    });
  });
  series.push({
    label: "quantum limit",
    color: GREY,
    dashed: true,
    x: series[0].x,
    y: series[0].x.map(() => 1),
  });
  return {
    title: spec.title,
    xLabel: "T (s)",
    yLabel: "CFI / QFI",
    xScale: spec.xScale ?? "log",
    yScale: spec.yScale ?? "linear",
    series,
    vlines: [],
  };
}

/** Inverse BMSE over the fitted CFI vs T, one curve per record (typically
 * one per qubit number); 1 means the estimator saturates the Fisher floor. */
function convergenceVsTime(spec: FigureSpec, specPath: string): FigureData {
  const series: Series[] = [];
  loadRecords(spec, specPath).forEach(({ ref, rec }, i) => {
    requireExperiment(rec, "bmse-sweep");
    const T = numbers(rec, "T");
    const bmse = numbers(rec, "bmse");
    const fit = numbers(rec, "fit");
    const N = constantNumber(rec, "N");
    series.push({
      label: ref.label ?? `N = ${N}`,
      color: PALETTE[i % PALETTE.length],
      x: T,
      y: bmse.map((v, k) => 1 / (v * fit[k])),
      markers: true,
    });
  });
  series.push({
    label: "saturation",
    color: GREY,
    dashed: true,
    x: series[0].x,
    y: series[0].x.map(() => 1),
  });
  return {
    title: spec.title,
    xLabel: "T (s)",
    yLabel: "1 / (BMSE x fitted CFI)",
    xScale: spec.xScale ?? "log",
    yScale: spec.yScale ?? "linear",
    series,
    vlines: [],
  };
}

/** Scaled frequency error sqrt(BMSE) sqrt(N) / delta_omega vs T for the
 * sequential protocol and the baselines, with the quantum limit, the prior
 * width, and the phase-slip onset T = pi / delta_omega. */
function errorScaling(spec: FigureSpec, specPath: string): FigureData {
  const series: Series[] = [];
  let deltaOmega: number | null = null;
  let tAll: number[] = [];
  const loaded = loadRecords(spec, specPath);
  loaded.forEach(({ ref, rec }, i) => {
    const exp = experimentOf(rec);
    const errorColumn =
      exp === "oci" ? "bmse_min" : exp === "bmse-sweep" || exp === "cascaded" ? "bmse" : null;
    if (errorColumn === null) {
      throw new SchemaError(
        `record ${rec.path} is a ${exp} record; this figure needs bmse-sweep, cascaded, or oci`,
      );
    }
    const T = numbers(rec, "T");
    const err = numbers(rec, errorColumn);
    const N = constantNumber(rec, "N");
    const dw = constantNumber(rec, "delta_omega");
    if (deltaOmega !== null && Math.abs(dw - deltaOmega) > 1e-12 * deltaOmega) {
      throw new SchemaError(
        `record ${rec.path} has delta_omega ${dw}; other records use ${deltaOmega}`,
      );
    }
    deltaOmega = dw;
    tAll = tAll.concat(T);
    series.push({
      label: ref.label ?? (exp === "bmse-sweep" ? "sequential" : exp),
      color: PALETTE[i % PALETTE.length],
      x: T,
      y: err.map((v) => (Math.sqrt(v) * Math.sqrt(N)) / dw),
      markers: true,
    });
  });
  const dw = deltaOmega as unknown as number;
  const lo = Math.min(...tAll);
  const hi = Math.max(...tAll);
  const dense = logGrid(lo, hi);
  series.push({
    label: "quantum limit",
    color: GREY,
    dashed: true,
    x: dense,
    y: dense.map((t) => 1 / (2 * t * dw)),
  });
  // prior width needs N; scale by the first record's N column
  const N0 = constantNumber(loaded[0].rec, "N");
  series.push({
    label: "prior width",
    color: "#aa7700",
    dashed: true,
    x: [lo, hi],
    y: [Math.sqrt(N0 / 12), Math.sqrt(N0 / 12)],
  });
  const vlines =
    Math.PI / dw >= lo && Math.PI / dw <= hi
      ? [{ x: Math.PI / dw, label: "T = pi/delta_omega" }]
      : [];
  return {
    title: spec.title,
    xLabel: "T (s)",
    yLabel: "sqrt(BMSE) sqrt(N) / delta_omega",
    xScale: spec.xScale ?? "log",
    yScale: spec.yScale ?? "log",
    series,
    vlines,
  };
}

export function renderFigure(spec: FigureSpec, specPath: string): string {
  switch (spec.figure) {
    case "information-vs-time":
      return renderSvg(informationVsTime(spec, specPath));
    case "convergence-vs-time":
      return renderSvg(convergenceVsTime(spec, specPath));
    case "error-scaling":
      return renderSvg(errorScaling(spec, specPath));
  }
}
