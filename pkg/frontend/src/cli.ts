#!/usr/bin/env node
/**
 * braindec-export: label a phrases TSV with a pretrained sentiment model.
 *
 *   braindec-export --phrases phrases.tsv --out labels.tsv
 *
 * Reads the phrases format written by `braindec segment`, writes a label
 * file that `braindec validate-labels` accepts. The first run downloads
 * the model; later runs reuse the local cache and produce identical
 * output (inference has no sampling).
 */

import process from "node:process";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import {
  Classifier,
  DEFAULT_MODEL,
  defaultConfig,
  exportLabels,
  loadTransformersClassifier,
} from "./exporter.js";

async function main(): Promise<number> {
  const argv = await yargs(hideBin(process.argv))
    .scriptName("braindec-export")
    .option("phrases", { type: "string", demandOption: true, describe: "input phrases TSV" })
    .option("out", { type: "string", demandOption: true, describe: "output labels TSV" })
    .option("model", { type: "string", default: DEFAULT_MODEL })
    .option("revision", { type: "string", default: "main" })
    .option("batch-size", { type: "number", default: 16 })
    .option("device", { type: "string", default: "cpu" })
    .strict()
    .help()
    .parse();

  const cfg = defaultConfig({
    phrasesPath: argv.phrases,
    labelsPath: argv.out,
    model: argv.model,
    revision: argv.revision,
    batchSize: argv["batch-size"],
    device: argv.device,
  });

  try {
    // load lazily so bad input files fail before any model download
    let pipe: Promise<Classifier> | null = null;
    const classify: Classifier = async (texts) => {
      pipe ??= loadTransformersClassifier(cfg);
      return (await pipe)(texts);
    };
    const { rows, proportions } = await exportLabels(cfg, classify);
    console.log(
      `wrote ${rows} labels to ${cfg.labelsPath} ` +
      `(neutral ${proportions.neutral.toFixed(1)}%, ` +
      `positive ${proportions.positive.toFixed(1)}%, ` +
      `negative ${proportions.negative.toFixed(1)}%)`);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

process.exitCode = await main();
