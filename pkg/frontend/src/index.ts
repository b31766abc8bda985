export { RefusalError, SchemaError } from "./errors.js";
export { renderFigure } from "./figures.js";
export { fitFor, fitWeakOnly, fitWeakWithStrong, qfi } from "./overlays.js";
export { readRecord, requireColumns, numbers, constantNumber } from "./record.js";
export type { RunRecord, Cell } from "./record.js";
export { FIGURE_KINDS, figureSpecSchema, loadSpec } from "./schema.js";
export type { FigureSpec } from "./schema.js";
export { renderSvg } from "./svg.js";
export type { FigureData, Series } from "./svg.js";
