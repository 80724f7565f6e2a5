"""Experiment orchestration: configs, report files, determinism, posthoc."""

import logging
import math

import pytest
import yaml

from braindec.experiment import (
    METRICS_HEADER,
    POSTHOC_NAME,
    ExperimentConfig,
    SeedMetrics,
    SummaryRow,
    atomic_write_text,
    config_from_dict,
    format_metrics_csv,
    format_plot_csv,
    format_summary_csv,
    load_config,
    load_epochs,
    parse_metrics_csv,
    parse_summary_csv,
    posthoc_row,
    run_experiment,
    summarize_metrics,
    write_report,
    _summarize_tolerant,
)
from braindec.models.train import TrainConfig
from braindec.synth import SynthConfig, generate

BALANCED = (1 / 3, 1 / 3, 1 / 3)


def small_synth(**overrides):
    base = dict(n_phrases=30, class_priors=BALANCED, snr=5.0, sample_rate=100.0,
                n_channels=8, window_seconds=0.5, seed=9)
    base.update(overrides)
    return dict(base)


def small_experiment(out_dir, **overrides) -> ExperimentConfig:
    base = dict(
        out_dir=out_dir,
        synth=SynthConfig(**small_synth()),
        window_seconds=0.5,
        seeds=(0, 1),
        architectures=("mlp",),
        train=TrainConfig(learning_rate=0.01, batch_size=8, epochs=2, hidden_size=8),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------- configs


def test_config_from_dict_defaults(tmp_path):
    cfg = config_from_dict({"synth": small_synth()}, out_dir=tmp_path)
    assert cfg.out_dir == tmp_path
    assert cfg.seeds == tuple(range(10))
    assert cfg.architectures == ("mlp", "lstm")
    assert cfg.window_seconds == 2.0
    assert cfg.workers == 1
    assert cfg.synth.n_phrases == 30


def test_config_seed_count_and_list(tmp_path):
    cfg = config_from_dict({"synth": small_synth(), "seeds": 3}, out_dir=tmp_path)
    assert cfg.seeds == (0, 1, 2)
    cfg = config_from_dict({"synth": small_synth(), "seeds": [5, 7]}, out_dir=tmp_path)
    assert cfg.seeds == (5, 7)


def test_config_data_section(tmp_path):
    raw = {"data": {"events": "e.tsv", "labels": "l.tsv", "recording": "r.bin"}}
    cfg = config_from_dict(raw, out_dir=tmp_path)
    assert cfg.events_path.name == "e.tsv"
    assert cfg.labels_path.name == "l.tsv"
    assert cfg.recording_path.name == "r.bin"
    assert cfg.synth is None


def test_config_train_section(tmp_path):
    raw = {"synth": small_synth(), "train": {"learning_rate": 0.005, "epochs": 7}}
    cfg = config_from_dict(raw, out_dir=tmp_path)
    assert cfg.train.learning_rate == 0.005
    assert cfg.train.epochs == 7
    assert cfg.train.batch_size == 32


def test_config_out_dir_resolution(tmp_path):
    raw = {"synth": small_synth(), "out_dir": str(tmp_path / "from_file")}
    assert config_from_dict(raw).out_dir == tmp_path / "from_file"
    # an explicit out_dir argument wins over the config value
    raw = {"synth": small_synth(), "out_dir": str(tmp_path / "from_file")}
    assert config_from_dict(raw, out_dir=tmp_path / "arg").out_dir == tmp_path / "arg"


@pytest.mark.parametrize("raw,pattern", [
    ({"synth": {"n_phrases": 30}, "typo_key": 1}, "unknown config keys"),
    ({"data": {"events": "e", "labels": "l", "recording": "r", "extra": "x"}},
     "unknown data keys"),
    ({}, "either a synth section or all three data paths"),
    ({"synth": {"n_phrases": 30}, "fractions": [0.5, 0.5]}, "must have 3 entries"),
    ({"synth": {"n_phrases": 30}, "fractions": [0.5, 0.3, 0.1]},
     "split fractions sum to"),
    ({"synth": {"n_phrases": 30}, "architectures": ["cnn"]}, "unknown architecture"),
    ({"synth": {"n_phrases": 30}, "seeds": []}, "at least one seed"),
    ({"synth": {"n_phrases": 30}, "architectures": []}, "at least one architecture"),
    ({"synth": {"n_phrases": 30}, "workers": 0}, "workers must be at least 1"),
    ({"synth": {"n_phrases": 30}, "window_seconds": 0}, "window_seconds must be positive"),
])
def test_config_validation_errors(tmp_path, raw, pattern):
    with pytest.raises(ValueError, match=pattern):
        config_from_dict(raw, out_dir=tmp_path)


def test_config_requires_out_dir():
    with pytest.raises(ValueError, match="output directory is required"):
        config_from_dict({"synth": {"n_phrases": 30}})


def test_load_config_yaml(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump({
        "synth": small_synth(), "seeds": 2, "architectures": ["mlp"],
        "window_seconds": 0.5, "train": {"epochs": 3},
    }))
    cfg = load_config(path, out_dir=tmp_path / "out")
    assert cfg.seeds == (0, 1)
    assert cfg.architectures == ("mlp",)
    assert cfg.train.epochs == 3


def test_load_config_rejects_non_mapping(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ValueError, match="config root must be a mapping"):
        load_config(path, out_dir=tmp_path)


def test_atomic_write_text(tmp_path):
    path = tmp_path / "out.txt"
    atomic_write_text(path, "first")
    atomic_write_text(path, "second")
    assert path.read_text() == "second"
    assert list(tmp_path.iterdir()) == [path]


# ---------------------------------------------------------------- CSV formats


def test_metrics_csv_roundtrip(tmp_path):
    rows = [SeedMetrics(0, "mlp", 0.8125, 0.7433333333333333),
            SeedMetrics(1, "lstm", 0.5, 1 / 3)]
    path = tmp_path / "metrics.csv"
    path.write_text(format_metrics_csv(rows))
    assert parse_metrics_csv(path) == rows


def test_metrics_csv_bad_header(tmp_path):
    path = tmp_path / "metrics.csv"
    path.write_text("a,b,c,d\n")
    with pytest.raises(ValueError, match="bad metrics header"):
        parse_metrics_csv(path)


def test_summary_csv_roundtrip_with_nan_and_none(tmp_path):
    rows = [SummaryRow("mlp", "accuracy", 0.9, 0.01, 5.5, 0.0002, 0.85),
            SummaryRow(POSTHOC_NAME, "balanced_accuracy", 0.1, 0.0,
                       float("nan"), float("nan"), None)]
    path = tmp_path / "summary.csv"
    path.write_text(format_summary_csv(rows))
    parsed = parse_summary_csv(path)
    assert parsed[0] == rows[0]
    assert parsed[1].architecture == POSTHOC_NAME
    assert parsed[1].mean == 0.1
    assert math.isnan(parsed[1].t) and math.isnan(parsed[1].p)
    assert parsed[1].baseline is None


def test_summary_csv_bad_header(tmp_path):
    path = tmp_path / "summary.csv"
    path.write_text("x\n")
    with pytest.raises(ValueError, match="bad summary header"):
        parse_summary_csv(path)


def test_plot_csv_shape():
    rows = [SeedMetrics(0, "mlp", 0.8, 0.7), SeedMetrics(1, "mlp", 0.9, 0.8)]
    lines = format_plot_csv(rows, 0.5).strip().splitlines()
    assert lines[0] == "architecture,metric,seed,value,baseline"
    assert len(lines) == 1 + 2 * len(rows)
    assert lines[1].startswith("mlp,accuracy,0,")
    assert lines[3].startswith("mlp,balanced_accuracy,0,")
    assert lines[3].endswith(repr(1 / 3))


# ---------------------------------------------------------------- summaries


def test_posthoc_row_reference_values():
    row = posthoc_row(35.878, 0.335, 10, 35.745, 0.245, 10)
    assert row.architecture == POSTHOC_NAME
    assert row.metric == "balanced_accuracy"
    assert row.mean == pytest.approx(35.878 - 35.745)
    assert row.sem == pytest.approx(math.hypot(0.335, 0.245))
    assert row.t == pytest.approx(0.321, abs=1e-3)
    assert row.p == pytest.approx(0.752, abs=1e-3)
    assert row.baseline is None


def test_summarize_tolerant_degenerate(caplog):
    with caplog.at_level(logging.WARNING, logger="braindec"):
        summary = _summarize_tolerant([0.9, 0.9, 0.9], 1 / 3)
    assert summary.mean == pytest.approx(0.9)
    assert summary.sem == 0.0
    assert math.isnan(summary.t) and math.isnan(summary.p)
    assert summary.n == 3
    assert any("t-test undefined" in rec.message for rec in caplog.records)


def test_summarize_tolerant_passthrough():
    summary = _summarize_tolerant([0.8, 0.9, 1.0], 1 / 3)
    assert summary.mean == pytest.approx(0.9)
    assert not math.isnan(summary.t)
    with pytest.raises(ValueError, match="need at least 2 seed values"):
        _summarize_tolerant([0.9], 1 / 3)


def test_summarize_metrics_shape_two_archs():
    rows = [SeedMetrics(s, arch, 0.5 + 0.1 * s + (0.05 if arch == "mlp" else 0.0),
                        0.4 + 0.1 * s + (0.05 if arch == "mlp" else 0.0))
            for s in range(3) for arch in ("mlp", "lstm")]
    out = summarize_metrics(rows, ("mlp", "lstm"), 0.5)
    assert [(r.architecture, r.metric) for r in out] == [
        ("mlp", "accuracy"), ("mlp", "balanced_accuracy"),
        ("lstm", "accuracy"), ("lstm", "balanced_accuracy"),
        (POSTHOC_NAME, "balanced_accuracy"),
    ]
    assert out[0].baseline == 0.5
    assert out[1].baseline == pytest.approx(1 / 3)
    assert out[4].baseline is None
    assert out[4].mean == pytest.approx(0.05)


def test_summarize_metrics_single_arch_has_no_posthoc():
    rows = [SeedMetrics(s, "mlp", 0.5 + 0.1 * s, 0.4 + 0.1 * s) for s in range(3)]
    out = summarize_metrics(rows, ("mlp",), 0.5)
    assert len(out) == 2


def test_summarize_metrics_zero_spread_posthoc(caplog):
    # 0.75 and 0.5 are binary-exact, so the per-arch spread is exactly zero
    rows = [SeedMetrics(s, arch, 0.5 + 0.1 * s, 0.75 if arch == "mlp" else 0.5)
            for s in range(3) for arch in ("mlp", "lstm")]
    with caplog.at_level(logging.WARNING, logger="braindec"):
        out = summarize_metrics(rows, ("mlp", "lstm"), 0.5)
    posthoc = out[-1]
    assert posthoc.architecture == POSTHOC_NAME
    assert posthoc.mean == 0.25
    assert posthoc.sem == 0.0
    assert math.isnan(posthoc.t) and math.isnan(posthoc.p)
    assert any("posthoc comparison undefined" in rec.message for rec in caplog.records)


# ---------------------------------------------------------------- end to end


def test_run_experiment_files_and_determinism(tmp_path):
    summary_a = run_experiment(small_experiment(tmp_path / "a"))
    summary_b = run_experiment(small_experiment(tmp_path / "b"))
    report_files = ("metrics.csv", "summary.csv", "plot_data.csv",
                    "loss_mlp_seed0.csv", "loss_mlp_seed1.csv")
    for name in report_files:
        first = (tmp_path / "a" / name).read_bytes()
        second = (tmp_path / "b" / name).read_bytes()
        assert first == second, name
    assert [(r.architecture, r.metric) for r in summary_a] == \
        [(r.architecture, r.metric) for r in summary_b]
    assert (tmp_path / "a" / "data" / "events.tsv").exists()

    rows = parse_metrics_csv(tmp_path / "a" / "metrics.csv")
    assert [(r.seed, r.architecture) for r in rows] == [(0, "mlp"), (1, "mlp")]
    for r in rows:
        assert 0.0 <= r.accuracy <= 1.0
        assert 0.0 <= r.balanced_accuracy <= 1.0

    parsed = parse_summary_csv(tmp_path / "a" / "summary.csv")
    assert [(r.architecture, r.metric) for r in parsed] == \
        [("mlp", "accuracy"), ("mlp", "balanced_accuracy")]


def test_run_experiment_worker_count_does_not_change_outputs(tmp_path):
    run_experiment(small_experiment(tmp_path / "serial"))
    run_experiment(small_experiment(tmp_path / "pooled", workers=2))
    for name in ("metrics.csv", "summary.csv", "plot_data.csv"):
        assert (tmp_path / "serial" / name).read_bytes() == \
            (tmp_path / "pooled" / name).read_bytes()


def test_run_experiment_single_seed_warns_and_skips_summary(tmp_path, caplog):
    cfg = small_experiment(tmp_path / "one", seeds=(0,))
    with caplog.at_level(logging.WARNING, logger="braindec"):
        summary = run_experiment(cfg)
    assert summary == []
    assert (tmp_path / "one" / "metrics.csv").exists()
    assert not (tmp_path / "one" / "summary.csv").exists()
    assert any("at least 2 seeds" in rec.message for rec in caplog.records)


def test_write_report_formats_summary(tmp_path):
    out = tmp_path / "exp"
    run_experiment(small_experiment(out))
    report_path = write_report(out)
    assert report_path == out / "report.md"
    text = report_path.read_text()
    assert text.startswith("# Decoding results")
    for row in parse_summary_csv(out / "summary.csv"):
        assert f"| {row.architecture} | {row.metric} | {row.mean:.3f} ± {row.sem:.3f} " \
            f"| {row.t:.3f} | {row.p:.3f} |" in text


def test_write_report_missing_summary(tmp_path):
    with pytest.raises(FileNotFoundError, match="no metrics found"):
        write_report(tmp_path)


def test_load_epochs_from_files(tmp_path):
    paths = generate(SynthConfig(**small_synth()), tmp_path / "corpus")
    cfg = ExperimentConfig(
        out_dir=tmp_path / "out",
        events_path=paths.events,
        labels_path=paths.labels,
        recording_path=paths.recording,
        window_seconds=0.5,
        seeds=(0, 1),
    )
    epochs = load_epochs(cfg)
    assert len(epochs) == 30
    assert epochs[0].data.shape == (50, 8)
