import time

import numpy as np
import pytest

from freqprint.classifier import activity_report, evaluate, fit, sample_size_sweep
from freqprint.defense import NoiseConfig, augment_dataset
from freqprint.defense.noise import burst_coverage
from freqprint.nn import TrainConfig
from freqprint.synth import SignatureTemplate, SynthConfig, generate
from freqprint.traces import ActivityConfig, FrequencyTrace, frequency_activity, split_dataset
from freqprint.types import Split

pytestmark = pytest.mark.acceptance


def test_end_to_end_accuracy(desk_dataset, desk_train_config):
    started = time.perf_counter()
    report = evaluate(fit(desk_dataset, "native", desk_train_config).model, desk_dataset)

    assert report.top1 >= 0.90
    assert report.top5 >= report.top3 >= report.top1
    assert time.perf_counter() - started < 600


def test_concurrent_disturbers_degrade_accuracy(desk_dataset_factory, desk_train_config, clean_report):
    accuracy = {0: clean_report.top1}
    for disturbers in (4, 10):
        ds = desk_dataset_factory(disturbers)
        accuracy[disturbers] = evaluate(fit(ds, "native", desk_train_config).model, ds).top1

    assert accuracy[0] >= accuracy[4] >= accuracy[10]
    assert accuracy[0] - accuracy[10] >= 0.05


def test_sample_size_sweep(desk_dataset, desk_train_config):
    results = sample_size_sweep(desk_dataset, [125, 250, 500], "native", desk_train_config)

    assert list(results) == [125, 250, 500]
    assert results[500].top1 >= results[125].top1
    for report in results.values():
        assert report.top5 >= report.top3 >= report.top1


def test_noise_defense_and_retraining(desk_dataset, desk_train_config, clean_model, clean_report):
    max_khz = max(max(item.trace.samples) for item in desk_dataset.items)
    noise = NoiseConfig()
    noisy_test = augment_dataset(desk_dataset, noise, max_khz, seed=1)
    coverage = [
        burst_coverage(clean.trace, noisy.trace)
        for clean, noisy, tag in zip(desk_dataset.items, noisy_test.items, desk_dataset.split_assignment)
        if tag == Split.TEST
    ]
    assert np.mean(coverage) >= 0.30

    noisy_accuracy = evaluate(clean_model, noisy_test).top1
    lost = clean_report.top1 - noisy_accuracy
    assert lost >= 0.30

    noisy_everywhere = augment_dataset(desk_dataset, noise, max_khz, seed=1, splits=None)
    retrained_accuracy = evaluate(fit(noisy_everywhere, "native", desk_train_config).model, noisy_everywhere).top1
    assert retrained_accuracy - noisy_accuracy >= lost / 2


def test_frequency_activity_matches_linear_scan():
    rng = np.random.default_rng(10)
    for _ in range(1000):
        samples = rng.integers(0, 3_000_000, size=int(rng.integers(1, 300)))
        threshold = int(rng.integers(1, 3_000_000))
        expected = 0
        for value in samples:
            if value > threshold:
                expected += 1
        trace = FrequencyTrace(samples=samples, interval_ms=10)
        assert frequency_activity(trace, ActivityConfig(threshold_khz=threshold)) == expected


def _overlapped_low_activity_bank(n_samples):
    # Low activity classes share one short burst and can not be told apart.
    low = [SignatureTemplate(label=f"low-{i}", segments=((150, 8, 0),), n_samples=n_samples) for i in range(3)]
    high = [
        SignatureTemplate(label="high-0", segments=((10, 60, 4),), n_samples=n_samples),
        SignatureTemplate(label="high-1", segments=((80, 90, 2),), n_samples=n_samples),
        SignatureTemplate(label="high-2", segments=((20, 40, 1), (120, 70, 3)), n_samples=n_samples),
    ]
    return low + high


def test_mispredictions_concentrate_on_low_activity_classes():
    bank = _overlapped_low_activity_bank(200)
    ds = split_dataset(generate(SynthConfig(templates=tuple(bank), n_samples=200, traces_per_class=30, seed=4)), 4)
    cfg = TrainConfig(learning_rate=1e-3, batch_size=16, max_epochs=20, early_stop_patience=5, seed=4)

    table = activity_report(evaluate(fit(ds, "native", cfg).model, ds), ds)

    assert table.spearman is not None
    assert table.spearman < 0
    activity = {row.label: row.mean_activity for row in table.rows}
    assert max(activity[f"low-{i}"] for i in range(3)) < min(activity[f"high-{i}"] for i in range(3))
