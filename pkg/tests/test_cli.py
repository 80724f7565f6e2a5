"""CLI subcommands, exercised through main(argv) with captured output."""

import numpy as np
import pytest
import yaml

from braindec.cli import main
from braindec.epochs import (
    TEST,
    extract_epochs,
    read_recording,
    split_dataset,
    standardize,
)
from braindec.events import PAUSE, WORD, Event, parse_events, segment_phrases, write_events
from braindec.labels import (
    argmax_class,
    class_proportions,
    compare_with_humans,
    parse_annotations,
    parse_labels,
    write_labels,
)
from braindec.metrics import ConfusionMatrix, accuracy, balanced_accuracy
from braindec.models import load_checkpoint, predict

from conftest import make_label

WINDOW = "0.5"


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    rc = main(["synth", "--out", str(out), "--seed", "9", "--n-phrases", "30",
               "--snr", "5", "--priors", "0.34", "0.33", "0.33",
               "--channels", "8", "--sample-rate", "100",
               "--window-seconds", WINDOW])
    assert rc == 0
    return out


def corpus_args(out):
    return ["--events", str(out / "events.tsv"),
            "--labels", str(out / "labels.tsv"),
            "--recording", str(out / "recording.bin"),
            "--window-seconds", WINDOW]


def test_synth_writes_corpus(corpus, capsys):
    for name in ("events.tsv", "labels.tsv", "recording.bin", "ground_truth.csv"):
        assert (corpus / name).exists()


def test_synth_rerun_byte_identical(tmp_path, capsys):
    args = ["--seed", "3", "--n-phrases", "12", "--snr", "1",
            "--priors", "0.34", "0.33", "0.33", "--channels", "4",
            "--sample-rate", "50", "--window-seconds", WINDOW]
    assert main(["synth", "--out", str(tmp_path / "a")] + args) == 0
    assert main(["synth", "--out", str(tmp_path / "b")] + args) == 0
    out = capsys.readouterr().out
    assert out.count("wrote") == 2
    assert (tmp_path / "a" / "recording.bin").read_bytes() == \
        (tmp_path / "b" / "recording.bin").read_bytes()


def test_segment_single_phrase(tmp_path, capsys):
    events = [Event(0.0, 0.4, WORD, "Hello"), Event(0.5, 0.4, WORD, "world")]
    events_path = tmp_path / "events.tsv"
    with open(events_path, "w") as fh:
        write_events(events, fh)
    out_path = tmp_path / "phrases.tsv"
    assert main(["segment", "--events", str(events_path), "--out", str(out_path)]) == 0
    assert "wrote 1 phrases" in capsys.readouterr().out
    text = out_path.read_text()
    assert "hello world" in text


def test_segment_pause_splits_phrases(tmp_path, capsys):
    events = [Event(0.0, 0.4, WORD, "one"), Event(0.5, 0.3, PAUSE, ""),
              Event(1.0, 0.4, WORD, "two")]
    events_path = tmp_path / "events.tsv"
    with open(events_path, "w") as fh:
        write_events(events, fh)
    out_path = tmp_path / "phrases.tsv"
    assert main(["segment", "--events", str(events_path), "--out", str(out_path)]) == 0
    assert "wrote 2 phrases" in capsys.readouterr().out


def test_validate_labels_ok(tmp_path, capsys):
    path = tmp_path / "labels.tsv"
    with open(path, "w") as fh:
        write_labels([make_label(i, i % 3) for i in range(3)], fh)
    assert main(["validate-labels", "--labels", str(path)]) == 0
    out = capsys.readouterr().out
    assert "3 labels valid" in out
    assert "33.3%" in out


def test_validate_labels_corrupt(tmp_path, capsys):
    path = tmp_path / "labels.tsv"
    path.write_text("phrase_id\tp_neutral\tp_positive\tp_negative\n"
                    "0\t0.8\t0.2\t0.2\n")
    assert main(["validate-labels", "--labels", str(path)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert "exceeds tolerance" in err


def test_align_writes_manifest(corpus, tmp_path, capsys):
    manifest = tmp_path / "manifest.tsv"
    rc = main(["align"] + corpus_args(corpus) + ["--out", str(manifest)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "aligned 30 epochs of 50 samples" in out
    lines = manifest.read_text().strip().splitlines()
    assert lines[0] == "phrase_id\tsplit"
    assert len(lines) == 31


def test_split_counts(corpus, tmp_path, capsys):
    manifest = tmp_path / "manifest.tsv"
    rc = main(["split"] + corpus_args(corpus) + ["--out", str(manifest)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "split 30 epochs: train=24, val=3, test=3" in out


@pytest.fixture(scope="module")
def trained(corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("trained")
    rc = main(["train"] + corpus_args(corpus) + [
        "--out", str(out), "--arch", "mlp", "--epochs", "2",
        "--learning-rate", "0.01", "--batch-size", "8", "--hidden-size", "8"])
    assert rc == 0
    return out


def test_train_writes_checkpoint_and_curves(trained, capsys):
    assert (trained / "model_mlp_seed0.ckpt").exists()
    loss_lines = (trained / "loss_mlp_seed0.csv").read_text().strip().splitlines()
    assert loss_lines[0] == "epoch,train_loss,val_loss"
    assert len(loss_lines) == 3


def test_eval_matches_library_recomputation(corpus, trained, capsys):
    ckpt = trained / "model_mlp_seed0.ckpt"
    rc = main(["eval"] + corpus_args(corpus) + ["--checkpoint", str(ckpt)])
    assert rc == 0
    out = capsys.readouterr().out

    with open(corpus / "events.tsv") as fh:
        phrases = segment_phrases(parse_events(fh))
    with open(corpus / "labels.tsv") as fh:
        labels = parse_labels(fh)
    with open(corpus / "recording.bin", "rb") as fh:
        rec = read_recording(fh)
    epochs, _ = extract_epochs(rec, phrases, labels, 0.5)
    ds = standardize(split_dataset(epochs, seed=0))
    test_eps = ds.split_epochs(TEST)
    preds = predict(load_checkpoint(ckpt), test_eps)
    cm = ConfusionMatrix.from_pairs(
        [(argmax_class(ep.label), cls) for ep, (_, cls) in zip(test_eps, preds)])

    assert f"test epochs: {cm.total}" in out
    assert f"accuracy: {accuracy(cm):.6f}" in out
    assert f"balanced_accuracy: {balanced_accuracy(cm):.6f}" in out


def test_compare_models_table(tmp_path, capsys):
    labels = [make_label(i, i % 3) for i in range(6)]
    labels_path = tmp_path / "mymodel.tsv"
    with open(labels_path, "w") as fh:
        write_labels(labels, fh)
    ann_lines = ["phrase_id\tn_neutral\tn_positive\tn_negative"]
    for i in range(6):
        counts = [1, 1, 1]
        counts[i % 3] = 8
        ann_lines.append("\t".join([str(i)] + [str(c) for c in counts]))
    ann_path = tmp_path / "annotations.tsv"
    ann_path.write_text("\n".join(ann_lines) + "\n")

    rc = main(["compare-models", "--labels", str(labels_path),
               "--annotations", str(ann_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "| Model | % Neutral | % Positive | % Negative | rho | p |"

    with open(labels_path) as fh:
        parsed = parse_labels(fh)
    with open(ann_path) as fh:
        annotations = parse_annotations(fh)
    props = class_proportions(parsed)
    agreement = compare_with_humans(parsed, annotations)
    assert agreement.rho_avg == pytest.approx(1.0)
    expected = (f"| mymodel | {props.pct_neutral:.3f} | {props.pct_positive:.3f} "
                f"| {props.pct_negative:.3f} | {agreement.rho_avg:.3f} "
                f"| {agreement.p_avg:.3f} |")
    assert expected in out


def test_compare_models_out_file(tmp_path, capsys):
    labels_path = tmp_path / "m.tsv"
    with open(labels_path, "w") as fh:
        write_labels([make_label(i, i % 3) for i in range(6)], fh)
    ann_lines = ["phrase_id\tn_neutral\tn_positive\tn_negative"]
    for i in range(6):
        counts = [1, 1, 1]
        counts[i % 3] = 8
        ann_lines.append("\t".join([str(i)] + [str(c) for c in counts]))
    ann_path = tmp_path / "a.tsv"
    ann_path.write_text("\n".join(ann_lines) + "\n")
    table_path = tmp_path / "table.md"
    rc = main(["compare-models", "--labels", str(labels_path),
               "--annotations", str(ann_path), "--out", str(table_path)])
    assert rc == 0
    assert table_path.exists()
    assert table_path.read_text().startswith("| Model |")


def test_report_empty_dir(tmp_path, capsys):
    assert main(["report", "--dir", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert "no metrics found" in err


def test_experiment_subcommand(tmp_path, capsys):
    config = {
        "synth": {"n_phrases": 30, "class_priors": [0.34, 0.33, 0.33],
                  "snr": 5.0, "sample_rate": 100.0, "n_channels": 8,
                  "window_seconds": 0.5, "seed": 9},
        "window_seconds": 0.5,
        "seeds": 2,
        "architectures": ["mlp"],
        "train": {"learning_rate": 0.01, "batch_size": 8, "epochs": 2,
                  "hidden_size": 8},
    }
    cfg_path = tmp_path / "exp.yaml"
    cfg_path.write_text(yaml.safe_dump(config))
    out_dir = tmp_path / "out"
    rc = main(["experiment", "--config", str(cfg_path), "--out", str(out_dir)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "mlp accuracy:" in out
    assert "mlp balanced_accuracy:" in out
    assert f"report at {out_dir / 'report.md'}" in out
    for name in ("metrics.csv", "summary.csv", "plot_data.csv", "report.md"):
        assert (out_dir / name).exists()

    # --epochs overrides the config's epoch count
    out2 = tmp_path / "short"
    rc = main(["experiment", "--config", str(cfg_path), "--out", str(out2),
               "--epochs", "1"])
    assert rc == 0
    loss_lines = (out2 / "loss_mlp_seed0.csv").read_text().strip().splitlines()
    assert len(loss_lines) == 2


def test_unknown_log_level_exits(monkeypatch):
    monkeypatch.setenv("BRAINDEC_LOG", "CHATTY")
    with pytest.raises(SystemExit, match="unknown BRAINDEC_LOG level 'CHATTY'"):
        main(["report", "--dir", "unused"])


def test_missing_required_argument_exits():
    with pytest.raises(SystemExit) as excinfo:
        main(["synth"])
    assert excinfo.value.code == 2


def test_missing_file_reports_error(tmp_path, capsys):
    rc = main(["segment", "--events", str(tmp_path / "absent.tsv"),
               "--out", str(tmp_path / "o.tsv")])
    assert rc == 1
    assert capsys.readouterr().err.startswith("error:")
