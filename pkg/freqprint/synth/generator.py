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

"""Generation of labeled synthetic frequency traces from signature templates."""

from typing import Any, Dict, List, Tuple

import numpy as np
import structlog
from pydantic import validator

from freqprint.synth.templates import SignatureTemplate
from freqprint.traces.models import FreqprintBaseModel, FrequencyTrace, LabeledTrace, TraceDataset
from freqprint.types import FloatArray
from freqprint.utils.rng import make_rng

logger = structlog.get_logger(__name__)

JITTER_CLIP = 4.0


class SynthConfig(FreqprintBaseModel):
    templates: Tuple[SignatureTemplate, ...]
    n_samples: int = 4000
    traces_per_class: int = 100
    seed: int = 0
    concurrent_disturbers: int = 0
    disturbance_strength: int = 2_000_000
    interval_ms: int = 10

    @validator("templates")
    def _at_least_two_unique(cls, v: Tuple[SignatureTemplate, ...]) -> Tuple[SignatureTemplate, ...]:
        if len(v) < 2:
            raise ValueError("at least two templates are needed")
        if len({t.label for t in v}) != len(v):
            raise ValueError("template labels must be unique")
        return v

    @validator("n_samples")
    def _matches_templates(cls, v: int, values: Dict[str, Any]) -> int:
        mismatched = [t.label for t in values.get("templates", ()) if t.n_samples != v]
        if mismatched:
            raise ValueError(f"templates {mismatched} are not laid out on {v} samples")
        return v

    @validator("traces_per_class")
    def _at_least_five(cls, v: int) -> int:
        if v < 5:
            raise ValueError("traces_per_class must be at least 5")
        return v

    @validator("concurrent_disturbers", "disturbance_strength")
    def _non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("must not be negative")
        return v

    @validator("interval_ms")
    def _positive_interval(cls, v: int) -> int:
        if v < 1:
            raise ValueError("interval_ms must be at least 1")
        return v


def _add_disturbances(
    values: FloatArray, rng: np.random.Generator, count: int, strength: float, ceiling: float
) -> FloatArray:
    """Raise `count` random windows by `strength`, saturating at `ceiling`; samples above it stay put."""
    n = len(values)
    shortest = max(1, n // 20)
    longest = max(shortest, n // 5)
    for _ in range(count):
        start = int(rng.integers(0, n))
        length = int(rng.integers(shortest, longest + 1))
        window = values[start : start + length]
        values[start : start + length] = np.maximum(window, np.minimum(window + strength, ceiling))
    return values


def _snap_to_levels(values: FloatArray, levels: FloatArray, tolerance: float) -> FloatArray:
    nearest = levels[np.abs(values[:, None] - levels[None, :]).argmin(axis=1)]
    return np.where(np.abs(values - nearest) <= tolerance, nearest, values)


def generate_trace(cfg: SynthConfig, class_index: int, trace_index: int) -> FrequencyTrace:
    """One synthetic trace; depends only on the config, the class and the trace number."""
    template = cfg.templates[class_index]
    rng = make_rng((cfg.seed, class_index, trace_index))
    values = template.plateau().astype(np.float64)
    if template.jitter_khz > 0:
        bound = JITTER_CLIP * template.jitter_khz
        values += np.clip(rng.normal(0.0, template.jitter_khz, size=len(values)), -bound, bound)
    values = _add_disturbances(
        values, rng, cfg.concurrent_disturbers, float(cfg.disturbance_strength), float(template.max_level_khz)
    )
    values = _snap_to_levels(values, template.level_values.astype(np.float64), template.jitter_khz)
    values = np.maximum(values, template.base_khz)
    return FrequencyTrace(
        samples=np.rint(values).astype(np.int64),
        interval_ms=cfg.interval_ms,
        meta={"source": "synth", "template": template.label, "trace": str(trace_index)},
    )


def generate(cfg: SynthConfig) -> TraceDataset:
    """Generate `traces_per_class` traces for every template, classes in template order.

    Each trace is the template plateau plus clipped Gaussian jitter and `concurrent_disturbers` random bursts,
    snapped to the nearest template level when within `jitter_khz` and floored at the idle frequency.
    """
    items: List[LabeledTrace] = [
        LabeledTrace(trace=generate_trace(cfg, class_index, trace_index), label=template.label)
        for class_index, template in enumerate(cfg.templates)
        for trace_index in range(cfg.traces_per_class)
    ]
    logger.info(
        "Generated synthetic dataset",
        classes=len(cfg.templates),
        traces_per_class=cfg.traces_per_class,
        n_samples=cfg.n_samples,
        disturbers=cfg.concurrent_disturbers,
        seed=cfg.seed,
    )
    return TraceDataset.from_items(items)
