#!/usr/bin/env node
/** figures render --kind PVAL_ECDF|SMD_BOX|GATE_CURVE --in data.csv --out fig.svg
 * Consumes the adlab CLI's CSV schemas and writes an SVG figure.
 * Exits nonzero on malformed input. */

import fs from 'node:fs';
import path from 'node:path';

import { CsvError, parseCsv } from './csv.js';
import { PlotKind, render, REQUIRED_COLUMNS } from './plots.js';

const USAGE = `usage: figures render --kind <PVAL_ECDF|SMD_BOX|GATE_CURVE> --in <csv> --out <svg> [--group-by <column>]

  PVAL_ECDF   from pvalues.csv (or balance_stats.csv); column: p
  SMD_BOX     from balance_stats.csv; columns: feature_id, kind, smd
  GATE_CURVE  from gate_curve.csv; columns: bin_center, n_tests, mean_frac_sig, ci_lo, ci_hi
`;

function parseArgs(argv: string[]): { kind: PlotKind; input: string; output: string; groupBy?: string } {
  if (argv[0] !== 'render') {
    throw new UsageError(`unknown command: ${argv[0] ?? '(none)'}`);
  }
  const opts: Record<string, string> = {};
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith('--') || value === undefined) {
      throw new UsageError(`bad argument: ${flag}`);
    }
    opts[flag.slice(2)] = value;
  }
  for (const required of ['kind', 'in', 'out']) {
    if (!(required in opts)) throw new UsageError(`missing --${required}`);
  }
  if (!(opts['kind'] in REQUIRED_COLUMNS)) {
    throw new UsageError(`unknown plot kind: ${opts['kind']}`);
  }
  return {
    kind: opts['kind'] as PlotKind,
    input: opts['in'],
    output: opts['out'],
    groupBy: opts['group-by'],
  };
}

class UsageError extends Error {}

export function main(argv: string[]): number {
  let args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`error: ${err.message}\n${USAGE}`);
      return 2;
    }
    throw err;
  }
  try {
    const text = fs.readFileSync(args.input, 'utf8');
    const rows = parseCsv(text, REQUIRED_COLUMNS[args.kind]);
    const svg = render(args.kind, rows, args.groupBy);
    fs.mkdirSync(path.dirname(path.resolve(args.output)), { recursive: true });
    fs.writeFileSync(args.output, svg);
    process.stdout.write(`wrote ${args.output}\n`);
    return 0;
  } catch (err) {
    const message = err instanceof CsvError || (err as NodeJS.ErrnoException).code === 'ENOENT'
      ? (err as Error).message
      : String(err);
    process.stderr.write(`error: ${message}\n`);
    return 1;
  }
}

const invokedDirectly = process.argv[1] !== undefined
  && import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
