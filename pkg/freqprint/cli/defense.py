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

"""Defense commands: noise injection and detection of cpufreq polling."""

import sys
from pathlib import Path
from typing import Optional, Tuple

import structlog
import typer

from freqprint.defense import (
    DetectorConfig,
    NoiseConfig,
    calibrate_repeat_duration,
    detect as detect_polling,
    parse_event_stream,
    read_detector_config,
    run_noise_injector,
)
from freqprint.defense.detector import format_detections
from freqprint.defense.noise import format_burst_log, write_burst_log

logger = structlog.get_logger(__name__)

DEFAULT_CONFIG = "default"
STDIN = "-"


def _parse_range(value: str) -> Tuple[int, int]:
    parts = value.split(",")
    try:
        lo, hi = (int(part) for part in parts)
    except ValueError:
        raise typer.BadParameter(f"expected lo,hi, got {value!r}") from None
    return lo, hi


def noise_inject(
    core: int = typer.Option(0, "--core", help="Core to run the noise on."),
    duration: float = typer.Option(60.0, "--duration", help="Run time in seconds."),
    n_repeat: str = typer.Option("5,30", "--n-repeat", help="lo,hi range of kernel repetitions per burst."),
    t_sleep: str = typer.Option("50,300", "--t-sleep", help="lo,hi range of the idle time between bursts in ms."),
    kernel_iterations: int = typer.Option(20_000_000, "--kernel-iterations", help="FP operations per repetition."),
    seed: int = typer.Option(0, "--seed", help="Seed of the burst schedule."),
    log: Optional[Path] = typer.Option(None, "--log", help="Burst log file; printed when omitted."),
    calibrate: bool = typer.Option(False, "--calibrate", help="Only measure the duration of one repetition."),
) -> None:
    """Inject randomized floating point bursts on one core."""
    if calibrate:
        typer.echo(f"repeat_duration_ms={calibrate_repeat_duration(kernel_iterations):.3f}")
        return
    cfg = NoiseConfig.create(
        core_id=core,
        n_repeat_range=_parse_range(n_repeat),
        t_sleep_range_ms=_parse_range(t_sleep),
        kernel_iterations=kernel_iterations,
        duration_s=duration,
    )
    records = run_noise_injector(cfg, seed=seed)
    if log is None:
        typer.echo(format_burst_log(records), nl=False)
    else:
        write_burst_log(records, log)
        typer.echo(f"bursts={len(records)}")


def detect(
    config: str = typer.Option(DEFAULT_CONFIG, "--config", help="'default' or a key=value detector config file."),
    events: str = typer.Option(STDIN, "--events", help="Event stream file, '-' for standard input."),
) -> None:
    """Flag processes that poll cpufreq with the sampler syscall pattern."""
    cfg = DetectorConfig() if config == DEFAULT_CONFIG else read_detector_config(config)
    if events == STDIN:
        stream = parse_event_stream(sys.stdin)
    else:
        with open(events, encoding="utf-8") as fh:
            stream = parse_event_stream(fh)
    detections = detect_polling(stream, cfg)
    logger.info("Scanned event stream", events=len(stream), flagged=len(detections))
    typer.echo(format_detections(detections), nl=False)
