/**
 * Render SVG figures from a completed fracwave CLI run directory.
 *
 * A run directory holds one subdirectory per CLI invocation, each with a
 * manifest.json and its CSV tables (the run directory itself may also be a
 * single invocation). Rendering is read-only over the run directory; all
 * outputs (SVGs plus a figure index JSON) go to a separate output directory,
 * and re-rendering produces byte-identical files.
 */

import * as fs from "fs";
import * as path from "path";
import * as crypto from "crypto";

import { parseCsv, CsvTable, stringColumn } from "./csv";
import { FIGURES, FigureSpec, Manifest, figureByName } from "./figures";

/** A figure's source CSV is absent from the run directory. */
export class MissingTable extends Error {
  readonly table: string;

  constructor(table: string, detail: string) {
    super(`missing table ${table}: ${detail}`);
    this.name = "MissingTable";
    this.table = table;
  }
}

/** Constant-table digests in a CSV disagree internally or with the manifest. */
export class DigestMismatch extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "DigestMismatch";
  }
}

export interface RunEntry {
  dir: string;
  manifest: Manifest;
  manifestSha256: string;
}

export interface FigureIndexEntry {
  figure: string;
  file: string;
  command: string;
  run_subdir: string;
  inputs: Array<{ name: string; sha256: string }>;
}

export interface FigureIndex {
  schema_version: number;
  run_dir: string;
  figures: FigureIndexEntry[];
}

function sha256(buf: Buffer): string {
  return crypto.createHash("sha256").update(buf).digest("hex");
}

/** Find every manifest.json under runDir (depth-first, sorted, shallow). */
export function scanRunDir(runDir: string): Map<string, RunEntry> {
  if (!fs.existsSync(runDir) || !fs.statSync(runDir).isDirectory()) {
    throw new Error(`run directory not found: ${runDir}`);
  }
  const entries = new Map<string, RunEntry>();
  const stack = [runDir];
  while (stack.length > 0) {
    const dir = stack.pop() as string;
    const manifestPath = path.join(dir, "manifest.json");
    if (fs.existsSync(manifestPath)) {
      const raw = fs.readFileSync(manifestPath);
      const manifest = JSON.parse(raw.toString()) as Manifest;
      if (typeof manifest.command !== "string") {
        throw new Error(`manifest without a command field: ${manifestPath}`);
      }
      entries.set(manifest.command, {
        dir,
        manifest,
        manifestSha256: sha256(raw),
      });
    }
    for (const name of fs.readdirSync(dir).sort()) {
      const sub = path.join(dir, name);
      if (fs.statSync(sub).isDirectory()) stack.push(sub);
    }
  }
  return entries;
}

/**
 * Cross-check the constant-table digests a CSV carries.
 *
 * Within one table, every row at a fixed (alpha, n) must reference the same
 * RenormTable digest (figures must not mix constants across runs). If the
 * manifest itself records a table_digest, every non-empty digest cell must
 * equal it.
 */
export function checkDigests(table: CsvTable, manifest: Manifest,
                             csvName: string): void {
  if (!table.header.includes("table_digest")) return;
  const digests = stringColumn(table, "table_digest");
  const alphas = stringColumn(table, "alpha");
  const ns = stringColumn(table, "n");
  const byKey = new Map<string, string>();
  for (let i = 0; i < digests.length; i++) {
    if (digests[i] === "") continue;
    const key = `${alphas[i]}|${ns[i]}`;
    const prev = byKey.get(key);
    if (prev !== undefined && prev !== digests[i]) {
      throw new DigestMismatch(
        `${csvName}: rows at n=${ns[i]} carry different table digests ` +
        `(${prev} vs ${digests[i]})`);
    }
    byKey.set(key, digests[i]);
  }
  const expected = manifest["table_digest"];
  if (typeof expected === "string") {
    for (const d of digests) {
      if (d !== "" && d !== expected) {
        throw new DigestMismatch(
          `${csvName}: table digest ${d} does not match manifest ` +
          `digest ${expected}`);
      }
    }
  }
}

function loadTable(entry: RunEntry, spec: FigureSpec):
    { table: CsvTable; raw: Buffer } {
  const csvPath = path.join(entry.dir, spec.table);
  if (!fs.existsSync(csvPath)) {
    throw new MissingTable(
      spec.table,
      `expected in ${entry.dir} (listed by its manifest)`);
  }
  if (!entry.manifest.outputs.includes(spec.table)) {
    throw new MissingTable(
      spec.table,
      `present in ${entry.dir} but not listed in its manifest outputs`);
  }
  const raw = fs.readFileSync(csvPath);
  const table = parseCsv(raw.toString());
  checkDigests(table, entry.manifest, spec.table);
  return { table, raw };
}

/**
 * Render the requested figures (default: every figure whose source command
 * appears in the run directory) into outDir. Returns the figure index,
 * which is also written to outDir/figure_index.json.
 */
export function render(runDir: string, figureSet?: string[],
                       outDir = "figures"): FigureIndex {
  const entries = scanRunDir(runDir);
  let specs: FigureSpec[];
  if (figureSet === undefined) {
    specs = FIGURES.filter((f) => entries.has(f.command));
    if (specs.length === 0) {
      throw new Error(`no renderable manifests found under ${runDir}`);
    }
  } else {
    specs = figureSet.map(figureByName);
  }

  fs.mkdirSync(outDir, { recursive: true });
  const index: FigureIndex = {
    schema_version: 1,
    run_dir: path.resolve(runDir),
    figures: [],
  };
  for (const spec of specs) {
    const entry = entries.get(spec.command);
    if (!entry) {
      throw new MissingTable(
        spec.table,
        `no '${spec.command}' manifest found under ${runDir}`);
    }
    const { table, raw } = loadTable(entry, spec);
    const svg = spec.build(table, entry.manifest);
    const file = `${spec.name}.svg`;
    fs.writeFileSync(path.join(outDir, file), svg);
    index.figures.push({
      figure: spec.name,
      file,
      command: spec.command,
      run_subdir: path.relative(runDir, entry.dir) || ".",
      inputs: [
        { name: spec.table, sha256: sha256(raw) },
        { name: "manifest.json", sha256: entry.manifestSha256 },
      ],
    });
  }
  index.figures.sort((a, b) => a.figure.localeCompare(b.figure));
  fs.writeFileSync(path.join(outDir, "figure_index.json"),
                   JSON.stringify(index, null, 2) + "\n");
  return index;
}
