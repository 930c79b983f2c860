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

"""Data collection campaigns: every target is measured `measurements_per_target` times.

A campaign writes one trace file per core and measurement and keeps `manifest.tsv` up to date after every
measurement, so an interrupted campaign picks up where it stopped. Failed measurements are appended to
`failures.log` and retried on the next run.
"""
import re
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Set, Tuple

import structlog
from pydantic import validator

from freqprint.sampler.collection import SamplerConfig, collect_measurement
from freqprint.sampler.sources import Clock, FrequencySource, TargetRunner
from freqprint.settings import FAILURES_NAME, MANIFEST_NAME
from freqprint.traces.dataset import ManifestEntry, read_manifest, trace_relpath, write_manifest
from freqprint.traces.io import write_trace_file
from freqprint.traces.models import FreqprintBaseModel
from freqprint.types import Split
from freqprint.utils.datetime import now_ms
from freqprint.utils.errors import FreqprintError, InvalidArgumentError, ParseError, error_state_to_dict
from freqprint.utils.files import PathLike, atomic_write_text, read_text_file, safe_name
from freqprint.utils.keyvalue import format_key_values, iter_key_values, parse_float, parse_int, parse_int_list

logger = structlog.get_logger(__name__)

_TARGET_SEPARATOR = re.compile(r"(?<!\\)\|")


class CampaignTarget(FreqprintBaseModel):
    label: str
    launch: str
    kill: str = ""

    @validator("label")
    def _label_not_empty(cls, v: str) -> str:
        if not v:
            raise ValueError("target label must not be empty")
        return v


class CampaignSpec(FreqprintBaseModel):
    targets: Tuple[CampaignTarget, ...]
    measurements_per_target: int = 100

    @validator("targets")
    def _unique_labels(cls, v: Tuple[CampaignTarget, ...]) -> Tuple[CampaignTarget, ...]:
        labels = [t.label for t in v]
        if len(set(labels)) != len(labels):
            raise ValueError("target labels must be unique")
        directories: Dict[str, str] = {}
        for label in labels:
            other = directories.setdefault(safe_name(label), label)
            if other != label:
                raise ValueError(f"target labels {other!r} and {label!r} map to the same trace directory")
        return v

    @validator("measurements_per_target")
    def _at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("measurements_per_target must be at least 1")
        return v


def estimate_campaign_seconds(cfg: SamplerConfig, spec: CampaignSpec, include_sleep: bool = False) -> float:
    """Sampling time of a full campaign: targets x repetitions x N_s x T_i, optionally plus cool-downs."""
    measurements = len(spec.targets) * spec.measurements_per_target
    seconds = measurements * cfg.measurement_seconds
    if include_sleep:
        seconds += max(measurements - 1, 0) * cfg.inter_measurement_sleep_s
    return seconds


def measurement_relpath(label: str, repetition: int, core_id: int) -> str:
    return trace_relpath(label, f"{repetition:04d}-core{core_id}")


def run_campaign(
    cfg: SamplerConfig,
    spec: CampaignSpec,
    out_dir: PathLike,
    source: Optional[FrequencySource] = None,
    clock: Optional[Clock] = None,
    runner: Optional[TargetRunner] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> Path:
    """Measure every target `spec.measurements_per_target` times and return the manifest path.

    Measurements already present in the manifest are skipped. A failed measurement is logged to
    `failures.log` and the campaign continues; I/O errors abort the campaign.
    """
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    manifest_path = root / MANIFEST_NAME
    entries: List[ManifestEntry] = read_manifest(manifest_path)
    recorded: Set[str] = {path for _, path, _ in entries}

    logger.info(
        "Starting campaign",
        targets=len(spec.targets),
        repetitions=spec.measurements_per_target,
        cores=list(cfg.cores),
        estimated_hours=round(estimate_campaign_seconds(cfg, spec) / 3600, 2),
        estimated_hours_with_sleep=round(estimate_campaign_seconds(cfg, spec, include_sleep=True) / 3600, 2),
        already_recorded=len(entries),
    )

    failures: List[Dict[str, Any]] = []
    measured_any = False
    for target in spec.targets:
        for repetition in range(spec.measurements_per_target):
            paths = [measurement_relpath(target.label, repetition, core) for core in cfg.cores]
            if all(path in recorded for path in paths):
                continue
            if measured_any and cfg.inter_measurement_sleep_s > 0:
                sleep(cfg.inter_measurement_sleep_s)
            measured_any = True

            meta = {"label": target.label, "repetition": str(repetition), "launch": target.launch}
            try:
                traces = collect_measurement(
                    cfg, target.launch, target.kill, source=source, clock=clock, runner=runner, meta=meta
                )
            except FreqprintError as e:
                logger.warning("Measurement failed", label=target.label, repetition=repetition, error=str(e))
                failure = error_state_to_dict(e)
                failures.append(
                    {"time": now_ms(), "label": target.label, "repetition": repetition, "class": failure["class"],
                     "error": failure["error"]}
                )
                _append_failures(root / FAILURES_NAME, failures[-1:])
                continue

            for trace, path in zip(traces, paths):
                if path in recorded:
                    continue
                write_trace_file(trace, root / path)
                entries.append((target.label, path, Split.UNASSIGNED))
                recorded.add(path)
            write_manifest(manifest_path, entries)
            logger.info("Recorded measurement", label=target.label, repetition=repetition)

    logger.info("Campaign finished", entries=len(entries), failures=len(failures))
    return manifest_path


def _append_failures(path: Path, failures: List[Dict[str, Any]]) -> None:
    existing = path.read_text(encoding="utf-8") if path.exists() else ""
    records = "".join(format_key_values(failure) + "\n" for failure in failures)
    atomic_write_text(path, existing + records)


def parse_campaign_spec(text: str) -> Tuple[SamplerConfig, CampaignSpec]:
    """Parse a campaign spec file.

    `key=value` lines configure the sampler (`interval_ms`, `num_samples`, `inter_measurement_sleep_s`,
    `cores`) and the campaign (`measurements_per_target`); every `target=<label>|<launch>|<kill>` line adds a
    target. A pipe inside a field is written as `\\|`.

    >>> cfg, spec = parse_campaign_spec("num_samples=100\\ncores=2,3\\ntarget=redis|docker run redis|docker kill r")
    >>> cfg.cores, spec.targets[0].kill
    ((2, 3), 'docker kill r')
    >>> _, spec = parse_campaign_spec(r"target=gen|yes \\| head -c 1G > /dev/null|pkill yes")
    >>> spec.targets[0].launch
    'yes | head -c 1G > /dev/null'

    """
    sampler: Dict[str, Any] = {}
    campaign: Dict[str, Any] = {}
    targets: List[CampaignTarget] = []
    for line_no, key, value in iter_key_values(text.splitlines()):
        if key == "target":
            parts = [part.replace("\\|", "|").strip() for part in _TARGET_SEPARATOR.split(value)]
            if len(parts) not in (2, 3) or not parts[0] or not parts[1]:
                raise ParseError("target must look like <label>|<launch>|<kill>, write \\| for a pipe", line=line_no)
            kill = parts[2] if len(parts) == 3 else ""
            try:
                targets.append(CampaignTarget.create(label=parts[0], launch=parts[1], kill=kill))
            except InvalidArgumentError as e:
                raise ParseError(str(e), line=line_no) from None
        elif key in ("interval_ms", "num_samples"):
            sampler[key] = parse_int(value, key, line_no)
        elif key == "inter_measurement_sleep_s":
            sampler[key] = parse_float(value, key, line_no)
        elif key == "cores":
            sampler[key] = tuple(parse_int_list(value, key, line_no))
        elif key == "measurements_per_target":
            campaign[key] = parse_int(value, key, line_no)
        else:
            raise ParseError(f"unknown key {key!r}", line=line_no)
    if not targets:
        raise ParseError("campaign spec defines no targets")
    return SamplerConfig.create(**sampler), CampaignSpec.create(targets=tuple(targets), **campaign)


def read_campaign_spec(path: PathLike) -> Tuple[SamplerConfig, CampaignSpec]:
    return parse_campaign_spec(read_text_file(path))
