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

from collections import Counter
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ValidationError, validator

from freqprint.types import IntArray, Split
from freqprint.utils.errors import InvalidArgumentError, InvalidDatasetError

DEFAULT_ACTIVITY_THRESHOLD_KHZ = 1_200_000


class FreqprintBaseModel(BaseModel):
    class Config:
        allow_mutation = False
        arbitrary_types_allowed = True

    @classmethod
    def create(cls, **kwargs: Any) -> Any:
        """Construct the model, translating validation failures into `InvalidArgumentError`."""
        try:
            return cls(**kwargs)
        except ValidationError as e:
            raise InvalidArgumentError(f"invalid {cls.__name__}: {e.errors()[0]['msg']}", details=e.errors()) from e


class FrequencyTrace(FreqprintBaseModel):
    """One measurement: frequency samples in kHz read from one core every `interval_ms` milliseconds."""

    samples: Tuple[int, ...]
    interval_ms: int
    core_id: int = 0
    start_time: int = 0
    meta: Dict[str, str] = {}

    @validator("samples", pre=True)
    def _samples_to_ints(cls, v: Any) -> Tuple[int, ...]:
        values = np.asarray(v)
        if values.ndim != 1:
            raise ValueError("samples must be one dimensional")
        if values.size == 0:
            raise ValueError("a trace needs at least one sample")
        if values.dtype.kind == "f":
            if not np.all(np.isfinite(values)):
                raise ValueError("samples must be finite")
            values = np.rint(values)
        elif values.dtype.kind not in "iu":
            raise ValueError("samples must be integers")
        if np.any(values < 0):
            raise ValueError("samples must be non-negative")
        return tuple(int(s) for s in values.tolist())

    @validator("interval_ms")
    def _positive_interval(cls, v: int) -> int:
        if v <= 0:
            raise ValueError("interval_ms must be positive")
        return v

    def __len__(self) -> int:
        return len(self.samples)

    def array(self) -> IntArray:
        return np.asarray(self.samples, dtype=np.int64)

    @property
    def duration_ms(self) -> int:
        return len(self.samples) * self.interval_ms

    def with_samples(self, samples: Sequence[float]) -> "FrequencyTrace":
        """Return a copy with new samples; interval, core, start time and metadata are preserved."""
        return FrequencyTrace.create(
            samples=samples,
            interval_ms=self.interval_ms,
            core_id=self.core_id,
            start_time=self.start_time,
            meta=dict(self.meta),
        )


class LabeledTrace(FreqprintBaseModel):
    trace: FrequencyTrace
    label: str

    @validator("label")
    def _label_not_empty(cls, v: str) -> str:
        if not v:
            raise ValueError("label must not be empty")
        return v


class ActivityConfig(FreqprintBaseModel):
    threshold_khz: int = DEFAULT_ACTIVITY_THRESHOLD_KHZ

    @validator("threshold_khz")
    def _positive_threshold(cls, v: int) -> int:
        if v <= 0:
            raise ValueError("threshold_khz must be positive")
        return v


class TraceDataset(FreqprintBaseModel):
    """Labeled traces with per item split bookkeeping."""

    classes: Tuple[str, ...]
    items: Tuple[LabeledTrace, ...]
    split_assignment: Tuple[Split, ...] = ()

    @validator("classes")
    def _unique_classes(cls, v: Tuple[str, ...]) -> Tuple[str, ...]:
        if len(set(v)) != len(v):
            raise ValueError("classes must be unique")
        return v

    @validator("items")
    def _known_labels(cls, v: Tuple[LabeledTrace, ...], values: Dict[str, Any]) -> Tuple[LabeledTrace, ...]:
        known = set(values.get("classes", ()))
        for item in v:
            if item.label not in known:
                raise ValueError(f"label {item.label!r} is not one of the dataset classes")
        return v

    @validator("split_assignment", always=True)
    def _default_unassigned(cls, v: Tuple[Split, ...], values: Dict[str, Any]) -> Tuple[Split, ...]:
        items = values.get("items", ())
        if not v:
            return tuple(Split.UNASSIGNED for _ in items)
        if len(v) != len(items):
            raise ValueError("split_assignment must have one tag per item")
        return v

    @classmethod
    def from_items(cls, items: Sequence[LabeledTrace], split_assignment: Sequence[Split] = ()) -> "TraceDataset":
        """Build a dataset whose classes are the labels in order of first appearance."""
        classes = tuple(dict.fromkeys(item.label for item in items))
        try:
            return cls(classes=classes, items=tuple(items), split_assignment=tuple(split_assignment))
        except ValidationError as e:
            raise InvalidDatasetError(f"invalid dataset: {e.errors()[0]['msg']}", details=e.errors()) from e

    def __len__(self) -> int:
        return len(self.items)

    def class_index(self, label: str) -> int:
        try:
            return self.classes.index(label)
        except ValueError:
            raise InvalidDatasetError(f"unknown label {label!r}") from None

    def split(self, name: Split) -> List[LabeledTrace]:
        return [item for item, tag in zip(self.items, self.split_assignment) if tag == name]

    def counts(self) -> Dict[str, Counter]:
        """Per class counter of split tags."""
        result: Dict[str, Counter] = {label: Counter() for label in self.classes}
        for item, tag in zip(self.items, self.split_assignment):
            result[item.label][tag] += 1
        return result

    def with_assignment(self, split_assignment: Sequence[Split]) -> "TraceDataset":
        return TraceDataset(classes=self.classes, items=self.items, split_assignment=tuple(split_assignment))

    def map_traces(self, fn: Callable[[FrequencyTrace], FrequencyTrace]) -> "TraceDataset":
        """Apply `fn` to every trace, keeping labels, classes and split tags."""
        items = tuple(LabeledTrace(trace=fn(item.trace), label=item.label) for item in self.items)
        return TraceDataset(classes=self.classes, items=items, split_assignment=self.split_assignment)
