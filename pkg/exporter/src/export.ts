import * as fs from 'node:fs';

import { encodeCpl } from './cpl.js';
import { ManifestEntry } from './manifest.js';
import { Model } from './models.js';

export interface ExportJob {
  model: Model;
  manifest: ManifestEntry[];
  batchSize: number;
  outputPath: string;
  /** Skip unreadable images with a warning instead of aborting. */
  skipUnreadable?: boolean;
  warn?: (message: string) => void;
}

export interface ExportResult {
  rows: number;
  numClasses: number;
  skipped: string[];
}

/**
 * Run the model over the manifest batch by batch and write a CPL1 file
 * of raw logits plus labels, preserving manifest order.  Labels are
 * range-checked against the model's class count before anything is
 * written.
 */
export function exportLogits(job: ExportJob): ExportResult {
  const { model, manifest, outputPath } = job;
  const warn = job.warn ?? ((m) => process.stderr.write(m + '\n'));
  if (manifest.length === 0) {
    throw new Error('manifest is empty');
  }
  if (!Number.isInteger(job.batchSize) || job.batchSize < 1) {
    throw new Error('batch size must be a positive integer');
  }
  for (const entry of manifest) {
    if (entry.label >= model.numClasses) {
      throw new Error(
        `label ${entry.label} for ${entry.path} outside model's ` +
          `${model.numClasses} classes`,
      );
    }
  }

  const skipped: string[] = [];
  const kept: ManifestEntry[] = [];
  const images: Buffer[] = [];
  for (const entry of manifest) {
    try {
      images.push(fs.readFileSync(entry.path));
      kept.push(entry);
    } catch (err) {
      if (!job.skipUnreadable) {
        throw new Error(`unreadable image ${entry.path}: ${err}`);
      }
      warn(`warning: skipping unreadable image ${entry.path}`);
      skipped.push(entry.path);
    }
  }
  if (kept.length === 0) {
    throw new Error('no readable images left in manifest');
  }

  const K = model.numClasses;
  const values = new Float32Array(kept.length * K);
  for (let start = 0; start < kept.length; start += job.batchSize) {
    const batch = images.slice(start, start + job.batchSize);
    const rows = model.inferBatch(batch);
    if (rows.length !== batch.length) {
      throw new Error('model returned wrong number of rows for batch');
    }
    rows.forEach((row, i) => {
      if (row.length !== K) {
        throw new Error(`model row has ${row.length} logits, expected ${K}`);
      }
      values.set(row, (start + i) * K);
    });
  }

  const labels = Int32Array.from(kept, (e) => e.label);
  fs.writeFileSync(outputPath, encodeCpl({ values, labels, numClasses: K }));
  return { rows: kept.length, numClasses: K, skipped };
}
