"""Command-line entry point wiring the pipeline stages together.

Subcommands: synth, segment, validate-labels, align, split, train, eval,
compare-models, report, experiment. Set BRAINDEC_LOG (DEBUG/INFO/...) to
control log verbosity; BRAINDEC_BACKEND selects the compute kernels.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import experiment as exp
from .epochs import (
    TEST,
    extract_epochs,
    read_recording,
    split_dataset,
    standardize,
    write_manifest,
)
from .events import parse_events, segment_phrases, write_phrases
from .labels import (
    argmax_class,
    class_proportions,
    compare_with_humans,
    parse_annotations,
    parse_labels,
)
from .metrics import ConfusionMatrix, accuracy, balanced_accuracy
from .models import TrainConfig, load_checkpoint, predict, save_checkpoint, train
from .models.train import ARCHITECTURES, write_loss_curves
from .synth import SynthConfig, generate

log = logging.getLogger(__name__)


def _setup_logging() -> None:
    level_name = os.environ.get("BRAINDEC_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        raise SystemExit(f"error: unknown BRAINDEC_LOG level {level_name!r}")
    logging.basicConfig(level=level,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _add_corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--events", required=True, type=Path)
    p.add_argument("--labels", required=True, type=Path)
    p.add_argument("--recording", required=True, type=Path)
    p.add_argument("--window-seconds", type=float, default=2.0)
    p.add_argument("--min-pause", type=float, default=0.0,
                   help="pauses at least this long split phrases")
    p.add_argument("--seed", type=int, default=0)


def _load_dataset(args):
    with open(args.events) as fh:
        events = parse_events(fh)
    phrases = segment_phrases(events, args.min_pause)
    with open(args.labels) as fh:
        labels = parse_labels(fh)
    with open(args.recording, "rb") as fh:
        rec = read_recording(fh)
    epochs, _ = extract_epochs(rec, phrases, labels, args.window_seconds)
    ds = split_dataset(epochs, seed=args.seed)
    return standardize(ds)


def _cmd_synth(args) -> int:
    cfg = SynthConfig(
        n_phrases=args.n_phrases,
        class_priors=tuple(args.priors),
        snr=args.snr,
        sample_rate=args.sample_rate,
        n_channels=args.channels,
        window_seconds=args.window_seconds,
        seed=args.seed,
    )
    paths = generate(cfg, args.out)
    print(f"wrote {paths.events}, {paths.labels}, {paths.recording}, "
          f"{paths.ground_truth}")
    return 0


def _cmd_segment(args) -> int:
    with open(args.events) as fh:
        events = parse_events(fh)
    phrases = segment_phrases(events, args.min_pause)
    with open(args.out, "w") as fh:
        write_phrases(phrases, fh)
    print(f"wrote {len(phrases)} phrases to {args.out}")
    return 0


def _cmd_validate_labels(args) -> int:
    with open(args.labels) as fh:
        labels = parse_labels(fh)
    props = class_proportions(labels)
    print(f"{len(labels)} labels valid "
          f"(neutral {props.pct_neutral:.1f}%, positive {props.pct_positive:.1f}%, "
          f"negative {props.pct_negative:.1f}%)")
    return 0


def _cmd_align(args) -> int:
    ds = _load_dataset(args)
    with open(args.out, "w") as fh:
        write_manifest(ds, fh)
    n_steps = ds.epochs[0].data.shape[0] if ds.epochs else 0
    print(f"aligned {len(ds.epochs)} epochs of {n_steps} samples; "
          f"manifest at {args.out}")
    return 0


def _cmd_split(args) -> int:
    ds = _load_dataset(args)
    with open(args.out, "w") as fh:
        write_manifest(ds, fh)
    counts = {split: 0 for split in ("train", "val", "test")}
    for split in ds.split_of.values():
        counts[split] += 1
    print(f"split {len(ds.epochs)} epochs: " +
          ", ".join(f"{k}={v}" for k, v in counts.items()))
    return 0


def _cmd_train(args) -> int:
    ds = _load_dataset(args)
    cfg = TrainConfig(arch=args.arch, seed=args.seed, epochs=args.epochs,
                      learning_rate=args.learning_rate, batch_size=args.batch_size,
                      hidden_size=args.hidden_size)
    result = train(ds, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / f"model_{args.arch}_seed{args.seed}.ckpt"
    save_checkpoint(ckpt, result.best_params)
    write_loss_curves(out / f"loss_{args.arch}_seed{args.seed}.csv", result)
    print(f"trained {args.arch} for {result.epochs_run} epochs "
          f"({result.n_steps} steps); best val loss {result.best_val_loss:.6f} "
          f"at epoch {result.best_epoch}; checkpoint at {ckpt}")
    return 0


def _cmd_eval(args) -> int:
    ds = _load_dataset(args)
    params = load_checkpoint(args.checkpoint)
    test_eps = ds.split_epochs(TEST)
    preds = predict(params, test_eps)
    pairs = [(argmax_class(ep.label), cls)
             for ep, (_, cls) in zip(test_eps, preds)]
    cm = ConfusionMatrix.from_pairs(pairs)
    print(f"test epochs: {cm.total}")
    print(f"accuracy: {accuracy(cm):.6f}")
    print(f"balanced_accuracy: {balanced_accuracy(cm):.6f}")
    return 0


def _cmd_compare_models(args) -> int:
    with open(args.annotations) as fh:
        annotations = parse_annotations(fh)
    lines = [
        "| Model | % Neutral | % Positive | % Negative | rho | p |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for path in args.labels:
        with open(path) as fh:
            labels = parse_labels(fh)
        props = class_proportions(labels)
        agreement = compare_with_humans(labels, annotations)
        name = Path(path).stem
        lines.append(
            f"| {name} | {props.pct_neutral:.3f} | {props.pct_positive:.3f} "
            f"| {props.pct_negative:.3f} | {agreement.rho_avg:.3f} "
            f"| {agreement.p_avg:.3f} |")
    table = "\n".join(lines) + "\n"
    if args.out:
        exp.atomic_write_text(args.out, table)
        print(f"wrote {args.out}")
    else:
        print(table, end="")
    return 0


def _cmd_report(args) -> int:
    path = exp.write_report(args.dir)
    print(f"wrote {path}")
    return 0


def _cmd_experiment(args) -> int:
    cfg = exp.load_config(args.config, out_dir=args.out)
    if args.workers is not None:
        cfg.workers = args.workers
    if args.epochs is not None:
        cfg.train = replace(cfg.train, epochs=args.epochs)
    summary = exp.run_experiment(cfg)
    exp.write_report(cfg.out_dir)
    for row in summary:
        base = "" if row.baseline is None else f" (baseline {row.baseline:.3f})"
        print(f"{row.architecture} {row.metric}: {row.mean:.4f} +- {row.sem:.4f}, "
              f"t={row.t:.3f}, p={row.p:.4f}{base}")
    print(f"report at {cfg.out_dir / 'report.md'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="braindec",
        description="Phrase-level sentiment decoding pipeline for multichannel "
                    "brain recordings.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-phrases", type=int, default=600)
    p.add_argument("--snr", type=float, default=5.0)
    p.add_argument("--priors", type=float, nargs=3,
                   default=[0.85, 0.07, 0.08], metavar="P")
    p.add_argument("--channels", type=int, default=16)
    p.add_argument("--sample-rate", type=float, default=250.0)
    p.add_argument("--window-seconds", type=float, default=2.0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("segment", help="split an events file into phrases")
    p.add_argument("--events", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--min-pause", type=float, default=0.0)
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("validate-labels", help="check a label file")
    p.add_argument("--labels", required=True, type=Path)
    p.set_defaults(func=_cmd_validate_labels)

    p = sub.add_parser("align", help="extract and standardize epochs")
    _add_corpus_args(p)
    p.add_argument("--out", required=True, type=Path, help="manifest output path")
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("split", help="write the seeded split manifest")
    _add_corpus_args(p)
    p.add_argument("--out", required=True, type=Path, help="manifest output path")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train", help="train one decoder")
    _add_corpus_args(p)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--arch", choices=ARCHITECTURES, default="mlp")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--learning-rate", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--hidden-size", type=int, default=128)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on the test split")
    _add_corpus_args(p)
    p.add_argument("--checkpoint", required=True, type=Path)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("compare-models",
                       help="class proportions and human agreement per label file")
    p.add_argument("--labels", required=True, type=Path, nargs="+")
    p.add_argument("--annotations", required=True, type=Path)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=_cmd_compare_models)

    p = sub.add_parser("report", help="aggregate experiment CSVs into markdown")
    p.add_argument("--dir", required=True, type=Path)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("experiment", help="run a multi-seed experiment from a config")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--workers", type=int)
    p.add_argument("--epochs", type=int)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
