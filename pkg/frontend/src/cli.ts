#!/usr/bin/env node
/**
 * render_figures <artifact_dir> <out_dir>
 *
 * Renders every available figure kind from a holder-hj artifact
 * directory.  Missing inputs skip their figure with a warning; only
 * malformed CSV input exits nonzero.
 */

import { MalformedCsvError } from './csv';
import { renderAll } from './figures';

function main(argv: string[]): number {
  if (argv.length !== 2) {
    console.error('usage: render_figures <artifact_dir> <out_dir>');
    return 2;
  }
  const [artifactDir, outDir] = argv;
  try {
    const result = renderAll(artifactDir, outDir);
    for (const { kind, reason } of result.skipped) {
      console.warn(`skipping ${kind}: ${reason}`);
    }
    for (const path of result.written) {
      console.log(`wrote ${path}`);
    }
    console.log(`${result.written.length} figure(s), ${result.skipped.length} skipped`);
    return 0;
  } catch (err) {
    if (err instanceof MalformedCsvError) {
      console.error(`malformed CSV: ${err.message}`);
      return 1;
    }
    console.error(String(err));
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
