# Copyright 2023 freqprint contributors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Offline phase commands: collect or synthesize traces, train, evaluate and analyse models."""

from pathlib import Path
from typing import List, Optional

import structlog
import typer

from freqprint.classifier import (
    activity_report,
    default_preprocessing,
    evaluate,
    fit,
    format_activity_table,
    format_report,
    sample_size_sweep,
    sweep_table,
)
from freqprint.nn import TrainConfig, load_model, save_model
from freqprint.sampler import SysfsFrequencySource, read_campaign_spec, run_campaign
from freqprint.settings import SYSFS_CPU_ROOT, TEMPLATES_NAME
from freqprint.synth import SynthConfig, default_template_bank, generate, read_templates, write_templates
from freqprint.traces import ActivityConfig, TraceDataset, read_dataset, split_dataset, write_dataset
from freqprint.traces.dataset import store_assignment
from freqprint.types import Preset, Split
from freqprint.utils.keyvalue import format_key_values

logger = structlog.get_logger(__name__)


def _parse_sizes(value: str) -> List[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise typer.BadParameter(f"expected a comma separated list of integers, got {value!r}") from None


def _assigned_dataset(data: Path, seed: int, resplit: bool) -> TraceDataset:
    """Read a dataset and make sure every item has a split tag, storing a fresh split in the manifest."""
    ds = read_dataset(data)
    if resplit or any(tag == Split.UNASSIGNED for tag in ds.split_assignment):
        ds = split_dataset(ds, seed)
        store_assignment(ds, data)
        logger.info("Stored new split", data=str(data), seed=seed)
    return ds


def collect(
    spec: Path = typer.Option(..., "--spec", help="Campaign spec file: key=value settings and target lines."),
    out: Path = typer.Option(..., "--out", help="Output directory; an existing campaign there is resumed."),
    sysfs_root: Path = typer.Option(SYSFS_CPU_ROOT, "--sysfs-root", help="Root of the per-cpu sysfs tree."),
) -> None:
    """Measure every target of a campaign and record the traces."""
    cfg, campaign = read_campaign_spec(spec)
    manifest = run_campaign(cfg, campaign, out, source=SysfsFrequencySource(sysfs_root))
    typer.echo(f"manifest={manifest}")


def synth(
    classes: int = typer.Option(10, "--classes", help="Number of classes in the default template bank."),
    traces: int = typer.Option(100, "--traces", help="Traces per class."),
    samples: int = typer.Option(4000, "--samples", help="Samples per trace."),
    seed: int = typer.Option(0, "--seed", help="Seed for templates and traces."),
    disturbers: int = typer.Option(0, "--disturbers", help="Random disturbance bursts per trace."),
    disturbance_strength: int = typer.Option(2_000_000, "--disturbance-strength", help="Burst amplitude in kHz."),
    interval_ms: int = typer.Option(10, "--interval-ms", help="Sampling interval recorded in the traces."),
    templates: Optional[Path] = typer.Option(None, "--templates", help="Template bank file instead of a random one."),
    out: Path = typer.Option(..., "--out", help="Output dataset directory."),
) -> None:
    """Generate a labeled synthetic dataset."""
    bank = read_templates(templates) if templates else default_template_bank(classes, samples, seed)
    cfg = SynthConfig.create(
        templates=tuple(bank),
        n_samples=samples,
        traces_per_class=traces,
        seed=seed,
        concurrent_disturbers=disturbers,
        disturbance_strength=disturbance_strength,
        interval_ms=interval_ms,
    )
    ds = generate(cfg)
    write_templates(bank, out / TEMPLATES_NAME)
    manifest = write_dataset(ds, out)
    typer.echo(format_key_values({"manifest": manifest, "classes": len(ds.classes), "traces": len(ds)}), nl=False)


def train(
    data: Path = typer.Option(..., "--data", help="Dataset directory."),
    preset: Preset = typer.Option(Preset.NATIVE, "--preset", help="Network architecture."),
    seed: int = typer.Option(0, "--seed", help="Seed for the split, the initial weights and the shuffling."),
    out: Path = typer.Option(..., "--out", help="Model file to write."),
    epochs: int = typer.Option(100, "--epochs", help="Maximum number of epochs."),
    batch_size: int = typer.Option(32, "--batch-size", help="Mini-batch size."),
    learning_rate: float = typer.Option(1e-3, "--learning-rate", help="Adam learning rate."),
    patience: int = typer.Option(10, "--patience", help="Epochs without validation improvement before stopping."),
    input_length: Optional[int] = typer.Option(None, "--input-length", help="Samples fed to the network."),
    gaussian_window: Optional[int] = typer.Option(None, "--gaussian-window", help="Gaussian filter window."),
    movmax_window: Optional[int] = typer.Option(None, "--movmax-window", help="Moving maximum window."),
    resplit: bool = typer.Option(False, "--resplit", help="Draw a new train/validation/test split."),
) -> None:
    """Split the dataset if needed, train a model and save it."""
    ds = _assigned_dataset(data, seed, resplit)
    train_cfg = TrainConfig.create(
        learning_rate=learning_rate,
        batch_size=batch_size,
        max_epochs=epochs,
        early_stop_patience=patience,
        seed=seed,
    )
    preprocessing = default_preprocessing(ds, input_length, gaussian_window, movmax_window)
    result = fit(ds, preset, train_cfg, preprocessing)
    save_model(result.model, out)
    best = result.metrics[result.best_epoch - 1]
    typer.echo(
        format_key_values(
            {
                "model": out,
                "epochs": len(result.metrics),
                "best_epoch": result.best_epoch,
                "train_accuracy": f"{best.train_accuracy:.4f}",
                "validation_accuracy": f"{best.validation_accuracy:.4f}",
            }
        ),
        nl=False,
    )


def eval_model(
    model: Path = typer.Option(..., "--model", help="Model file."),
    data: Path = typer.Option(..., "--data", help="Dataset directory with a stored split."),
    split: Split = typer.Option(Split.TEST, "--split", help="Split to evaluate."),
    threshold_khz: int = typer.Option(1_200_000, "--threshold-khz", help="Frequency activity threshold."),
) -> None:
    """Evaluate a model: top-1/3/5 accuracy and per class misprediction."""
    report = evaluate(load_model(model), read_dataset(data), split, ActivityConfig.create(threshold_khz=threshold_khz))
    typer.echo(format_report(report), nl=False)


def sweep(
    data: Path = typer.Option(..., "--data", help="Dataset directory."),
    sizes: str = typer.Option(..., "--sizes", help="Comma separated sample sizes, e.g. 500,1000,2000."),
    preset: Preset = typer.Option(Preset.NATIVE, "--preset", help="Network architecture."),
    seed: int = typer.Option(0, "--seed", help="Seed shared by every sweep point."),
    epochs: int = typer.Option(100, "--epochs", help="Maximum number of epochs per sweep point."),
    patience: int = typer.Option(10, "--patience", help="Epochs without validation improvement before stopping."),
    resplit: bool = typer.Option(False, "--resplit", help="Draw a new train/validation/test split."),
) -> None:
    """Train and evaluate one model per sample size."""
    sample_sizes = _parse_sizes(sizes)
    ds = _assigned_dataset(data, seed, resplit)
    train_cfg = TrainConfig.create(max_epochs=epochs, early_stop_patience=patience, seed=seed)
    results = sample_size_sweep(ds, sample_sizes, preset, train_cfg)
    typer.echo(sweep_table(results))


def report_activity(
    model: Path = typer.Option(..., "--model", help="Model file."),
    data: Path = typer.Option(..., "--data", help="Dataset directory with a stored split."),
    threshold_khz: int = typer.Option(1_200_000, "--threshold-khz", help="Frequency activity threshold."),
) -> None:
    """Misprediction rate against frequency activity per class."""
    cfg = ActivityConfig.create(threshold_khz=threshold_khz)
    ds = read_dataset(data)
    report = evaluate(load_model(model), ds, Split.TEST, cfg)
    typer.echo(format_activity_table(activity_report(report, ds, cfg)), nl=False)
