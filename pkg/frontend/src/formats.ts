/**
 * Readers and writers for the braindec pipeline's TSV file formats.
 *
 * The exporter talks to the pipeline only through these files: it reads
 * the phrases format emitted by `braindec segment` and writes the label
 * format consumed by `braindec validate-labels` and the training stages.
 * Formats are mirrored here rather than imported so the two packages stay
 * independent.
 */

export const PHRASES_HEADER = "id\tonset\toffset\ttext";
export const LABELS_HEADER = "phrase_id\tp_neutral\tp_positive\tp_negative";

// one unit = 1e-6 of probability mass; rows must sum to exactly this
const MILLION = 1_000_000;

export class FormatError extends Error {}

export interface Phrase {
  id: number;
  onset: number;
  offset: number;
  text: string;
}

/** Probability triple in the pipeline's fixed class order. */
export interface SoftLabel {
  phraseId: number;
  pNeutral: number;
  pPositive: number;
  pNegative: number;
}

function parseNumber(raw: string, line: number, field: string): number {
  const value = Number(raw);
  if (raw.trim() === "" || Number.isNaN(value)) {
    throw new FormatError(`unparsable ${field} ${JSON.stringify(raw)} at line ${line}`);
  }
  return value;
}

export function parsePhrases(text: string): Phrase[] {
  const lines = text.split("\n");
  if (lines.length === 0 || lines[0] === "") {
    throw new FormatError("empty phrases file: missing header");
  }
  if (lines[0] !== PHRASES_HEADER) {
    throw new FormatError(
      `bad phrases header ${JSON.stringify(lines[0])}, expected ${JSON.stringify(PHRASES_HEADER)}`);
  }
  const phrases: Phrase[] = [];
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i];
    if (line === "") continue;
    const cols = line.split("\t");
    if (cols.length !== 4) {
      throw new FormatError(`expected 4 columns, found ${cols.length} at line ${i + 1}`);
    }
    const id = parseNumber(cols[0], i + 1, "id");
    if (!Number.isInteger(id)) {
      throw new FormatError(`unparsable id ${JSON.stringify(cols[0])} at line ${i + 1}`);
    }
    phrases.push({
      id,
      onset: parseNumber(cols[1], i + 1, "onset"),
      offset: parseNumber(cols[2], i + 1, "offset"),
      text: cols[3],
    });
  }
  return phrases;
}

/**
 * Round a probability triple to millionths so that the six-decimal file
 * representation sums to exactly 1. The rounding residual (at most a few
 * millionths) lands on the largest class, where it is relatively smallest.
 */
export function quantizeTriple(
  probs: readonly [number, number, number],
): [number, number, number] {
  for (const p of probs) {
    if (!(p >= 0) || !(p <= 1)) {
      throw new FormatError(`probability ${p} outside [0, 1]`);
    }
  }
  const sum = probs[0] + probs[1] + probs[2];
  if (Math.abs(sum - 1) > 1e-3) {
    throw new FormatError(`probabilities sum to ${sum}, expected 1`);
  }
  const units = probs.map((p) => Math.round((p / sum) * MILLION));
  let residual = MILLION - (units[0] + units[1] + units[2]);
  const largest = units.indexOf(Math.max(...units));
  units[largest] += residual;
  return [units[0] / MILLION, units[1] / MILLION, units[2] / MILLION];
}

export function formatLabels(labels: readonly SoftLabel[]): string {
  const rows = [LABELS_HEADER];
  for (const lab of labels) {
    rows.push(
      `${lab.phraseId}\t${lab.pNeutral.toFixed(6)}\t${lab.pPositive.toFixed(6)}` +
      `\t${lab.pNegative.toFixed(6)}`);
  }
  return rows.join("\n") + "\n";
}

/**
 * Parse a label file, enforcing the exporter's output contract: unique
 * phrase ids, probabilities in [0, 1], each row summing to 1 within 1e-6.
 * This is stricter than the pipeline's reader, which renormalizes small
 * deviations; files that pass here always parse cleanly there.
 */
export function parseLabels(text: string): SoftLabel[] {
  const lines = text.split("\n");
  if (lines.length === 0 || lines[0] === "") {
    throw new FormatError("empty label file: missing header");
  }
  if (lines[0] !== LABELS_HEADER) {
    throw new FormatError(
      `bad labels header ${JSON.stringify(lines[0])}, expected ${JSON.stringify(LABELS_HEADER)}`);
  }
  const labels: SoftLabel[] = [];
  const seen = new Set<number>();
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i];
    if (line === "") continue;
    const cols = line.split("\t");
    if (cols.length !== 4) {
      throw new FormatError(`expected 4 columns, found ${cols.length} at line ${i + 1}`);
    }
    const phraseId = parseNumber(cols[0], i + 1, "phrase_id");
    if (seen.has(phraseId)) {
      throw new FormatError(`duplicate phrase_id ${phraseId} at line ${i + 1}`);
    }
    seen.add(phraseId);
    const p = [1, 2, 3].map((k) => parseNumber(cols[k], i + 1, "probability"));
    for (const v of p) {
      if (v < 0 || v > 1) {
        throw new FormatError(`probability ${v} outside [0, 1] at line ${i + 1}`);
      }
    }
    const sum = p[0] + p[1] + p[2];
    if (Math.abs(sum - 1) > 1e-6) {
      throw new FormatError(`probabilities sum to ${sum} at line ${i + 1}, expected 1`);
    }
    labels.push({ phraseId, pNeutral: p[0], pPositive: p[1], pNegative: p[2] });
  }
  return labels;
}
