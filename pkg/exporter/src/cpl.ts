/**
 * Writer (and sanity-check reader) for the CPL1 binary container.
 *
 * Layout, all little-endian: magic "CPL1", u32 version (1), u64 row
 * count, u32 class count, u8 flags, then the float32 row-major matrix
 * and, if flag bit 0 is set, one i32 label per row.  Flag bit 1 marks a
 * probability payload; this exporter always writes raw logits (bit 1
 * clear).
 */

export const MAGIC = 'CPL1';
export const VERSION = 1;
export const FLAG_LABELS = 0x01;
export const FLAG_PROBABILITIES = 0x02;

const HEADER_SIZE = 4 + 4 + 8 + 4 + 1;

export interface LogitTable {
  /** Row-major n x numClasses logits. */
  values: Float32Array;
  labels: Int32Array;
  numClasses: number;
}

export function encodeCpl(table: LogitTable): Buffer {
  const { values, labels, numClasses } = table;
  if (numClasses < 1) {
    throw new Error('numClasses must be >= 1');
  }
  if (values.length % numClasses !== 0) {
    throw new Error('values length is not a multiple of numClasses');
  }
  const n = values.length / numClasses;
  if (labels.length !== n) {
    throw new Error(`expected ${n} labels, got ${labels.length}`);
  }
  for (let i = 0; i < n; i++) {
    if (labels[i] < 0 || labels[i] >= numClasses) {
      throw new Error(
        `label ${labels[i]} at row ${i} outside [0, ${numClasses})`,
      );
    }
  }
  for (let i = 0; i < values.length; i++) {
    if (!Number.isFinite(values[i])) {
      throw new Error(`non-finite logit at flat index ${i}`);
    }
  }

  const buf = Buffer.alloc(HEADER_SIZE + values.length * 4 + n * 4);
  let off = 0;
  off += buf.write(MAGIC, off, 'ascii');
  off = buf.writeUInt32LE(VERSION, off);
  off = Number(buf.writeBigUInt64LE(BigInt(n), off));
  off = buf.writeUInt32LE(numClasses, off);
  off = buf.writeUInt8(FLAG_LABELS, off);
  for (let i = 0; i < values.length; i++) {
    off = buf.writeFloatLE(values[i], off);
  }
  for (let i = 0; i < n; i++) {
    off = buf.writeInt32LE(labels[i], off);
  }
  return buf;
}

/** Decode a CPL1 buffer; used to verify our own output round-trips. */
export function decodeCpl(buf: Buffer): LogitTable & { flags: number } {
  if (buf.length < HEADER_SIZE) {
    throw new Error('truncated header');
  }
  if (buf.toString('ascii', 0, 4) !== MAGIC) {
    throw new Error('bad magic');
  }
  if (buf.readUInt32LE(4) !== VERSION) {
    throw new Error('unsupported version');
  }
  const n = Number(buf.readBigUInt64LE(8));
  const numClasses = buf.readUInt32LE(16);
  const flags = buf.readUInt8(20);
  const hasLabels = (flags & FLAG_LABELS) !== 0;
  const expected =
    HEADER_SIZE + n * numClasses * 4 + (hasLabels ? n * 4 : 0);
  if (buf.length !== expected) {
    throw new Error(`expected ${expected} bytes, got ${buf.length}`);
  }
  const values = new Float32Array(n * numClasses);
  let off = HEADER_SIZE;
  for (let i = 0; i < values.length; i++, off += 4) {
    values[i] = buf.readFloatLE(off);
  }
  const labels = new Int32Array(hasLabels ? n : 0);
  for (let i = 0; i < labels.length; i++, off += 4) {
    labels[i] = buf.readInt32LE(off);
  }
  return { values, labels, numClasses, flags };
}
