/**
 * Model plugin hook.
 *
 * A model maps a batch of image files (raw bytes) to logit rows.  Real
 * classifier backends register themselves here at startup; the built-in
 * stubs keep the exporter testable without any ML dependency.
 */

export interface Model {
  numClasses: number;
  /** One Float32Array of length numClasses per input image. */
  inferBatch(images: Buffer[]): Float32Array[];
}

export type ModelFactory = (spec: string) => Model;

const registry = new Map<string, ModelFactory>();

export function registerModel(prefix: string, factory: ModelFactory): void {
  registry.set(prefix, factory);
}

export class ModelResolutionError extends Error {}

/**
 * Resolve a free-form model identifier of the form `prefix` or
 * `prefix:args` against the registry.
 */
export function resolveModel(identifier: string): Model {
  const prefix = identifier.split(':', 1)[0];
  const factory = registry.get(prefix);
  if (!factory) {
    const known = [...registry.keys()].sort().join(', ');
    throw new ModelResolutionError(
      `unknown model "${identifier}" (registered: ${known})`,
    );
  }
  return factory(identifier);
}

// Built-in stubs.
//
// stub-constant: K=2, every image scores [1, 0].
registerModel('stub-constant', () => ({
  numClasses: 2,
  inferBatch: (images) => images.map(() => Float32Array.from([1, 0])),
}));

// stub-onehot:K: reads the class index from the image bytes (a decimal
// integer) and emits a scaled one-hot row, i.e. a perfect classifier.
registerModel('stub-onehot', (spec) => {
  const arg = spec.split(':')[1];
  const numClasses = Number(arg);
  if (!Number.isInteger(numClasses) || numClasses < 1) {
    throw new ModelResolutionError(`stub-onehot needs a class count, got "${spec}"`);
  }
  return {
    numClasses,
    inferBatch: (images) =>
      images.map((raw) => {
        const cls = Number(raw.toString('utf8').trim());
        const row = new Float32Array(numClasses);
        if (Number.isInteger(cls) && cls >= 0 && cls < numClasses) {
          row[cls] = 10;
        }
        return row;
      }),
  };
});
