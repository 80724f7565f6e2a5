/**
 * Batch phrases through a pretrained sentiment classifier and write the
 * result as a braindec label file.
 *
 * The model interface is a plain async function so tests can substitute a
 * stub; `loadTransformersClassifier` builds the real one on top of
 * transformers.js. Class names differ between models (NEU/POS/NEG,
 * LABEL_0..2, lowercase words), so the mapping from model output names to
 * the pipeline's (neutral, positive, negative) order is an explicit,
 * overridable table rather than a guess.
 */

import { rename, readFile, writeFile } from "node:fs/promises";

import {
  FormatError,
  Phrase,
  SoftLabel,
  formatLabels,
  parsePhrases,
  quantizeTriple,
} from "./formats.js";

export type ClassName = "neutral" | "positive" | "negative";

export interface ModelScore {
  label: string;
  score: number;
}

/** Full per-class score distributions for a batch of texts, one row per text. */
export type Classifier = (texts: string[]) => Promise<ModelScore[][]>;

export interface ExporterConfig {
  phrasesPath: string;
  labelsPath: string;
  model: string;
  revision: string;
  batchSize: number;
  device: string;
  classMap: Record<string, ClassName>;
}

// cardiffnlp twitter-roberta-base-sentiment indexes: 0 negative, 1 neutral, 2 positive
export const DEFAULT_CLASS_MAP: Record<string, ClassName> = {
  neutral: "neutral",
  positive: "positive",
  negative: "negative",
  neu: "neutral",
  pos: "positive",
  neg: "negative",
  label_0: "negative",
  label_1: "neutral",
  label_2: "positive",
};

export const DEFAULT_MODEL = "Xenova/twitter-roberta-base-sentiment";

export function defaultConfig(
  overrides: Partial<ExporterConfig> & Pick<ExporterConfig, "phrasesPath" | "labelsPath">,
): ExporterConfig {
  return {
    model: DEFAULT_MODEL,
    revision: "main",
    batchSize: 16,
    device: "cpu",
    classMap: DEFAULT_CLASS_MAP,
    ...overrides,
  };
}

export interface ExportSummary {
  rows: number;
  /** Percentage of rows whose argmax lands in each class. */
  proportions: Record<ClassName, number>;
}

function mapScores(
  scores: ModelScore[],
  classMap: Record<string, ClassName>,
): [number, number, number] {
  const byClass = new Map<ClassName, number>();
  for (const { label, score } of scores) {
    const mapped = classMap[label.toLowerCase()];
    if (mapped === undefined) {
      throw new FormatError(
        `unmappable model class name ${JSON.stringify(label)}; add it to the class map`);
    }
    if (byClass.has(mapped)) {
      throw new FormatError(`model returned class ${mapped} twice`);
    }
    byClass.set(mapped, score);
  }
  for (const name of ["neutral", "positive", "negative"] as const) {
    if (!byClass.has(name)) {
      throw new FormatError(`model scores missing class ${name}`);
    }
  }
  return quantizeTriple([
    byClass.get("neutral")!,
    byClass.get("positive")!,
    byClass.get("negative")!,
  ]);
}

function argmaxClass(lab: SoftLabel): ClassName {
  // ties break neutral > positive > negative, matching the pipeline
  let best: ClassName = "neutral";
  let bestP = lab.pNeutral;
  if (lab.pPositive > bestP) { best = "positive"; bestP = lab.pPositive; }
  if (lab.pNegative > bestP) { best = "negative"; }
  return best;
}

export function summarize(labels: readonly SoftLabel[]): ExportSummary {
  const counts: Record<ClassName, number> = { neutral: 0, positive: 0, negative: 0 };
  for (const lab of labels) counts[argmaxClass(lab)] += 1;
  const n = labels.length;
  return {
    rows: n,
    proportions: {
      neutral: n === 0 ? 0 : (100 * counts.neutral) / n,
      positive: n === 0 ? 0 : (100 * counts.positive) / n,
      negative: n === 0 ? 0 : (100 * counts.negative) / n,
    },
  };
}

export async function labelPhrases(
  phrases: readonly Phrase[],
  classify: Classifier,
  cfg: ExporterConfig,
): Promise<SoftLabel[]> {
  if (!Number.isInteger(cfg.batchSize) || cfg.batchSize < 1) {
    throw new FormatError(`batch size must be a positive integer, got ${cfg.batchSize}`);
  }
  const labels: SoftLabel[] = [];
  for (let start = 0; start < phrases.length; start += cfg.batchSize) {
    const batch = phrases.slice(start, start + cfg.batchSize);
    const results = await classify(batch.map((p) => p.text));
    if (results.length !== batch.length) {
      throw new FormatError(
        `model returned ${results.length} results for a batch of ${batch.length}`);
    }
    batch.forEach((phrase, i) => {
      const [pNeutral, pPositive, pNegative] = mapScores(results[i], cfg.classMap);
      labels.push({ phraseId: phrase.id, pNeutral, pPositive, pNegative });
    });
  }
  return labels;
}

export async function exportLabels(
  cfg: ExporterConfig,
  classify: Classifier,
): Promise<ExportSummary> {
  const phrases = parsePhrases(await readFile(cfg.phrasesPath, "utf8"));
  const labels = await labelPhrases(phrases, classify, cfg);
  const tmp = cfg.labelsPath + ".tmp";
  await writeFile(tmp, formatLabels(labels), "utf8");
  await rename(tmp, cfg.labelsPath);
  return summarize(labels);
}

/**
 * Wrap a transformers.js text-classification pipeline as a Classifier.
 * Downloads the model on first use; throws if the model cannot be fetched
 * (for example when the network allows no model hosts).
 */
export async function loadTransformersClassifier(cfg: ExporterConfig): Promise<Classifier> {
  const { pipeline } = await import("@xenova/transformers");
  const pipe = await pipeline("text-classification", cfg.model, {
    revision: cfg.revision,
    quantized: true,
  });
  return async (texts: string[]) => {
    const raw = await pipe(texts, { topk: null } as object);
    // single-input calls come back as one flat distribution, batches as one per text
    const rows = (Array.isArray(raw) && raw.length > 0 && Array.isArray(raw[0])
      ? raw
      : [raw]) as ModelScore[][];
    return rows;
  };
}
