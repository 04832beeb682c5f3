#!/usr/bin/env node
/**
 * Usage: fracwave-figures <run_dir> [out_dir] [--figures a,b,c]
 *
 * Exit codes: 0 success, 1 usage, 2 missing table / bad inputs.
 */

import { render, MissingTable } from "./render";

export function main(argv: string[]): number {
  const args = [...argv];
  let figureSet: string[] | undefined;
  const figIdx = args.indexOf("--figures");
  if (figIdx >= 0) {
    const spec = args[figIdx + 1];
    if (!spec) {
      console.error("--figures needs a comma-separated list");
      return 1;
    }
    figureSet = spec.split(",").filter((s) => s.length > 0);
    args.splice(figIdx, 2);
  }
  if (args.length < 1 || args.length > 2) {
    console.error("usage: fracwave-figures <run_dir> [out_dir] [--figures a,b]");
    return 1;
  }
  const runDir = args[0];
  const outDir = args[1] ?? "figures";
  try {
    const index = render(runDir, figureSet, outDir);
    for (const fig of index.figures) {
      console.log(`wrote ${outDir}/${fig.file} from ${fig.run_subdir}`);
    }
    return 0;
  } catch (err) {
    if (err instanceof MissingTable) {
      console.error(`MissingTable: ${err.message}`);
      return 2;
    }
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
