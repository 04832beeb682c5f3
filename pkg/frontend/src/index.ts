export { render, scanRunDir, checkDigests, MissingTable, DigestMismatch } from "./render";
export type { FigureIndex, FigureIndexEntry, RunEntry } from "./render";
export { FIGURES, figureByName } from "./figures";
export type { FigureSpec, Manifest } from "./figures";
export { parseCsv, numericColumn, stringColumn, columnIndex } from "./csv";
export type { CsvTable } from "./csv";
