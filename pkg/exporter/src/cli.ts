#!/usr/bin/env node
/**
 * cpl-export: run a registered model (or stub) over a labeled image
 * manifest and write a CPL1 logits file.
 *
 * Usage:
 *   cpl-export <manifest.csv> --model <id> --out <file.cpl>
 *              [--batch-size N] [--skip-unreadable]
 *
 * Exit codes: 0 success, 2 unreadable input, 3 bad configuration.
 */

import * as fs from 'node:fs';

import { exportLogits } from './export.js';
import { parseManifest } from './manifest.js';
import { ModelResolutionError, resolveModel } from './models.js';

const EXIT_INPUT = 2;
const EXIT_CONFIG = 3;

interface Args {
  manifestPath: string;
  model: string;
  out: string;
  batchSize: number;
  skipUnreadable: boolean;
}

function parseArgs(argv: string[]): Args {
  let manifestPath: string | undefined;
  let model: string | undefined;
  let out: string | undefined;
  let batchSize = 32;
  let skipUnreadable = false;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    switch (arg) {
      case '--model':
        model = argv[++i];
        break;
      case '--out':
        out = argv[++i];
        break;
      case '--batch-size':
        batchSize = Number(argv[++i]);
        break;
      case '--skip-unreadable':
        skipUnreadable = true;
        break;
      default:
        if (arg.startsWith('--')) {
          throw new Error(`unknown flag ${arg}`);
        }
        if (manifestPath !== undefined) {
          throw new Error('more than one manifest given');
        }
        manifestPath = arg;
    }
  }
  if (!manifestPath || !model || !out) {
    throw new Error('usage: cpl-export <manifest.csv> --model <id> --out <file.cpl>');
  }
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    throw new Error('--batch-size must be a positive integer');
  }
  return { manifestPath, model, out, batchSize, skipUnreadable };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return EXIT_CONFIG;
  }

  let manifestText: string;
  try {
    manifestText = fs.readFileSync(args.manifestPath, 'utf8');
  } catch (err) {
    process.stderr.write(`error: cannot read manifest: ${err}\n`);
    return EXIT_INPUT;
  }

  try {
    const manifest = parseManifest(manifestText);
    const model = resolveModel(args.model);
    const result = exportLogits({
      model,
      manifest,
      batchSize: args.batchSize,
      outputPath: args.out,
      skipUnreadable: args.skipUnreadable,
    });
    process.stdout.write(
      JSON.stringify({
        out: args.out,
        rows: result.rows,
        num_classes: result.numClasses,
        skipped: result.skipped,
      }) + '\n',
    );
    return 0;
  } catch (err) {
    const code = err instanceof ModelResolutionError ? EXIT_CONFIG : EXIT_INPUT;
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return code;
  }
}

if (process.argv[1] && /cli\.[cm]?js$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
