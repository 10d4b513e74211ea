/** Two-column CSV manifest: image path, integer label. */

export interface ManifestEntry {
  path: string;
  label: number;
}

/**
 * Parse manifest text.  Blank lines are skipped and a single optional
 * `path,label` header row is tolerated.  Anything else malformed is an
 * error rather than a silent skip.
 */
export function parseManifest(text: string): ManifestEntry[] {
  const entries: ManifestEntry[] = [];
  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === '') continue;
    if (i === 0 && line.toLowerCase() === 'path,label') continue;
    const comma = line.lastIndexOf(',');
    if (comma <= 0) {
      throw new Error(`manifest line ${i + 1}: expected "path,label"`);
    }
    const path = line.slice(0, comma).trim();
    const rawLabel = line.slice(comma + 1).trim();
    const label = Number(rawLabel);
    if (!Number.isInteger(label) || label < 0) {
      throw new Error(
        `manifest line ${i + 1}: label "${rawLabel}" is not a non-negative integer`,
      );
    }
    entries.push({ path, label });
  }
  if (entries.length === 0) {
    throw new Error('manifest is empty');
  }
  return entries;
}
