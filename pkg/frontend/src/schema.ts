import { readFileSync } from "node:fs";
import { z } from "zod";
import { SchemaError } from "./errors.js";

export const FIGURE_KINDS = [
  "information-vs-time",
  "convergence-vs-time",
  "error-scaling",
] as const;

const recordRef = z.object({
  path: z.string().min(1),
  label: z.string().optional(),
});

export const figureSpecSchema = z.object({
  figure: z.enum(FIGURE_KINDS),
  records: z.array(recordRef).min(1),
  title: z.string().optional(),
  // log y is meaningful for error-scaling only; x defaults per figure kind
  xScale: z.enum(["linear", "log"]).optional(),
  yScale: z.enum(["linear", "log"]).optional(),
  out: z.string().optional(),
});

export type FigureSpec = z.infer<typeof figureSpecSchema>;
export type RecordRef = z.infer<typeof recordRef>;

export function loadSpec(path: string): FigureSpec {
  let doc: unknown;
  try {
    doc = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new SchemaError(`spec ${path} is not valid JSON: ${(err as Error).message}`);
  }
  const result = figureSpecSchema.safeParse(doc);
  if (!result.success) {
    const first = result.error.issues[0];
    const where = first.path.length > 0 ? first.path.join(".") : "(root)";
    throw new SchemaError(`spec ${path}: ${where}: ${first.message}`);
  }
  return result.data;
}
