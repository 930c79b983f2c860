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

"""Signature templates: the noise-free plateau/burst layout that synthetic traces of one class are drawn from.

A template describes the idle frequency, a set of discrete frequency levels and a list of activity bursts on
an `n_samples` grid. An optional prefix models an environment start-up phase (MicroVM boot, image pull) that
runs before the workload itself.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import validator

from freqprint.traces.models import FreqprintBaseModel
from freqprint.types import IntArray
from freqprint.utils.errors import InvalidArgumentError, ParseError
from freqprint.utils.files import PathLike, atomic_write_text, read_text_file
from freqprint.utils.keyvalue import parse_float, parse_int, parse_int_list, split_key_value
from freqprint.utils.rng import make_rng

logger = structlog.get_logger(__name__)

TEMPLATES_MAGIC = "freqprint-templates v1"

DEFAULT_BASE_KHZ = 800_000
DEFAULT_LEVELS_KHZ = (1_400_000, 1_800_000, 2_200_000, 2_600_000, 2_800_000)
DEFAULT_JITTER_KHZ = 50_000
MIN_SEPARATION_FRACTION = 0.15
MAX_LAYOUT_ATTEMPTS = 10_000

# (start_index, length, level_index); level_index points into `levels`.
Segment = Tuple[int, int, int]


def _check_segments(segments: Sequence[Segment], grid: int, n_levels: int) -> None:
    for start, length, level in segments:
        if start < 0 or length < 1 or start + length > grid:
            raise ValueError(f"segment ({start}, {length}, {level}) does not fit a grid of {grid} samples")
        if not 0 <= level < n_levels:
            raise ValueError(f"segment ({start}, {length}, {level}) refers to an unknown level")


def _paint(segments: Sequence[Segment], grid: int) -> IntArray:
    """Level indices over the grid, 0 meaning idle. Later segments overwrite earlier ones."""
    indices = np.zeros(grid, dtype=np.int64)
    for start, length, level in segments:
        indices[start : start + length] = level + 1
    return indices


class PrefixSegment(FreqprintBaseModel):
    name: str
    length: int
    segments: Tuple[Segment, ...] = ()

    @validator("length")
    def _positive_length(cls, v: int) -> int:
        if v < 1:
            raise ValueError("prefix length must be at least 1")
        return v


class SignatureTemplate(FreqprintBaseModel):
    label: str
    base_khz: int = DEFAULT_BASE_KHZ
    levels: Tuple[int, ...] = DEFAULT_LEVELS_KHZ
    segments: Tuple[Segment, ...] = ()
    jitter_khz: float = DEFAULT_JITTER_KHZ
    n_samples: int = 4000
    prefix: Optional[PrefixSegment] = None

    @validator("label")
    def _label_not_empty(cls, v: str) -> str:
        if not v:
            raise ValueError("label must not be empty")
        return v

    @validator("levels")
    def _levels_above_base(cls, v: Tuple[int, ...], values: Dict[str, Any]) -> Tuple[int, ...]:
        base = values.get("base_khz", 0)
        if any(level < base for level in v):
            raise ValueError("every level must be at least base_khz")
        return v

    @validator("jitter_khz")
    def _non_negative_jitter(cls, v: float) -> float:
        if v < 0:
            raise ValueError("jitter_khz must not be negative")
        return v

    @validator("n_samples")
    def _positive_grid(cls, v: int) -> int:
        if v < 1:
            raise ValueError("n_samples must be at least 1")
        return v

    @validator("prefix", always=True)
    def _segments_fit(cls, v: Optional[PrefixSegment], values: Dict[str, Any]) -> Optional[PrefixSegment]:
        # Runs last so every other field has been validated already.
        if "n_samples" not in values or "levels" not in values:
            return v
        _check_segments(values.get("segments", ()), values["n_samples"], len(values["levels"]))
        if v is not None:
            _check_segments(v.segments, v.length, len(values["levels"]))
        return v

    @property
    def max_level_khz(self) -> int:
        return max(self.levels, default=self.base_khz)

    @property
    def level_values(self) -> IntArray:
        """kHz value of every level index, index 0 being the idle frequency."""
        return np.asarray((self.base_khz, *self.levels), dtype=np.int64)

    def level_indices(self) -> IntArray:
        main = _paint(self.segments, self.n_samples)
        if self.prefix is None:
            return main
        prefix = _paint(self.prefix.segments, self.prefix.length)
        return np.concatenate([prefix, main])[: self.n_samples]

    def plateau(self) -> IntArray:
        """The noise-free trace of this template in kHz."""
        return self.level_values[self.level_indices()]

    def burst_length(self) -> int:
        """Number of samples running above the idle frequency."""
        return int(np.count_nonzero(self.plateau() > self.base_khz))

    def with_prefix(self, prefix: Optional[PrefixSegment]) -> "SignatureTemplate":
        return SignatureTemplate.create(**{**self.dict(), "prefix": prefix})


def hamming_separation(a: SignatureTemplate, b: SignatureTemplate) -> int:
    """Number of grid positions where the two level-index sequences differ."""
    return int(np.count_nonzero(a.level_indices() != b.level_indices()))


def _random_segments(rng: np.random.Generator, n_samples: int, n_levels: int) -> Tuple[Segment, ...]:
    n_bursts = int(rng.integers(2, 6))
    shortest = max(1, n_samples // 20)
    longest = max(shortest, n_samples // 6)
    lengths = rng.integers(shortest, longest + 1, size=n_bursts)
    free = n_samples - int(lengths.sum())
    # Spread the idle samples over the n_bursts + 1 gaps around the bursts.
    gaps = rng.multinomial(free, np.full(n_bursts + 1, 1 / (n_bursts + 1)))
    segments = []
    position = 0
    for gap, length in zip(gaps, lengths):
        position += int(gap)
        segments.append((position, int(length), int(rng.integers(0, n_levels))))
        position += int(length)
    return tuple(segments)


def default_template_bank(
    n_classes: int, n_samples: int, seed: int, prefix: Optional[PrefixSegment] = None
) -> List[SignatureTemplate]:
    """Randomized but well separated templates, reproducible per seed.

    Every pair of templates differs on at least 15% of the grid positions. When `prefix` is given it is
    prepended to every template before the separation is measured.

    >>> bank = default_template_bank(3, 200, seed=1)
    >>> [t.label for t in bank]
    ['class-00', 'class-01', 'class-02']

    """
    if not 2 <= n_classes <= 64:
        raise InvalidArgumentError(f"n_classes must be in [2, 64], got {n_classes}")
    if n_samples < 20:
        raise InvalidArgumentError(f"n_samples must be at least 20, got {n_samples}")

    rng = make_rng(seed)
    required = int(np.ceil(MIN_SEPARATION_FRACTION * n_samples))
    bank: List[SignatureTemplate] = []
    for class_index in range(n_classes):
        for _ in range(MAX_LAYOUT_ATTEMPTS):
            candidate = SignatureTemplate(
                label=f"class-{class_index:02d}",
                segments=_random_segments(rng, n_samples, len(DEFAULT_LEVELS_KHZ)),
                n_samples=n_samples,
                prefix=prefix,
            )
            if all(hamming_separation(candidate, other) >= required for other in bank):
                bank.append(candidate)
                break
        else:
            raise InvalidArgumentError(
                f"could not lay out {n_classes} separated templates on {n_samples} samples",
                details={"found": len(bank)},
            )
    logger.debug("Built template bank", classes=n_classes, n_samples=n_samples, seed=seed)
    return bank


def _format_segments(segments: Sequence[Segment]) -> str:
    return ",".join(f"{start}:{length}:{level}" for start, length, level in segments)


def _parse_segments(value: str, key: str, line_no: int) -> Tuple[Segment, ...]:
    segments = []
    for part in filter(None, (p.strip() for p in value.split(","))):
        fields = part.split(":")
        if len(fields) != 3:
            raise ParseError(f"{key} entries must look like start:length:level, got {part!r}", line=line_no)
        start, length, level = (parse_int(f, key, line_no) for f in fields)
        segments.append((start, length, level))
    return tuple(segments)


def format_templates(templates: Sequence[SignatureTemplate]) -> str:
    blocks = []
    for template in templates:
        lines = [
            f"label={template.label}",
            f"base_khz={template.base_khz}",
            f"levels={','.join(str(level) for level in template.levels)}",
            f"jitter_khz={template.jitter_khz!r}",
            f"n_samples={template.n_samples}",
            f"segments={_format_segments(template.segments)}",
        ]
        if template.prefix is not None:
            lines += [
                f"prefix.name={template.prefix.name}",
                f"prefix.length={template.prefix.length}",
                f"prefix.segments={_format_segments(template.prefix.segments)}",
            ]
        blocks.append("\n".join(lines) + "\n")
    return TEMPLATES_MAGIC + "\n\n" + "\n".join(blocks)


def _template_from_block(block: List[Tuple[int, str]]) -> SignatureTemplate:
    fields: Dict[str, Any] = {}
    prefix: Dict[str, Any] = {}
    for line_no, raw in block:
        key, value = split_key_value(raw, line_no)
        if key == "label":
            fields["label"] = value
        elif key in ("base_khz", "n_samples"):
            fields[key] = parse_int(value, key, line_no)
        elif key == "levels":
            fields[key] = tuple(parse_int_list(value, key, line_no))
        elif key == "jitter_khz":
            fields[key] = parse_float(value, key, line_no)
        elif key == "segments":
            fields[key] = _parse_segments(value, key, line_no)
        elif key == "prefix.name":
            prefix["name"] = value
        elif key == "prefix.length":
            prefix["length"] = parse_int(value, key, line_no)
        elif key == "prefix.segments":
            prefix["segments"] = _parse_segments(value, key, line_no)
        else:
            raise ParseError(f"unknown key {key!r}", line=line_no)
    first_line = block[0][0]
    if "label" not in fields:
        raise ParseError("template block without a label", line=first_line)
    try:
        if prefix:
            fields["prefix"] = PrefixSegment.create(**prefix)
        return SignatureTemplate.create(**fields)
    except InvalidArgumentError as e:
        raise ParseError(e.message, line=first_line) from e


def parse_templates(text: str) -> List[SignatureTemplate]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != TEMPLATES_MAGIC:
        raise ParseError(f"expected header {TEMPLATES_MAGIC!r}", line=1)
    templates: List[SignatureTemplate] = []
    block: List[Tuple[int, str]] = []
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if line:
            block.append((line_no, line))
        elif block:
            templates.append(_template_from_block(block))
            block = []
    if block:
        templates.append(_template_from_block(block))
    return templates


def write_templates(templates: Sequence[SignatureTemplate], path: PathLike) -> Path:
    return atomic_write_text(path, format_templates(templates))


def read_templates(path: PathLike) -> List[SignatureTemplate]:
    return parse_templates(read_text_file(path))
