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

"""Dataset level operations: the train/validation/test split, manifests and normalization bounds."""

from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
import structlog

from freqprint.settings import MANIFEST_NAME
from freqprint.traces.io import read_trace_file, write_trace_file
from freqprint.traces.models import LabeledTrace, TraceDataset
from freqprint.types import Split
from freqprint.utils.errors import InvalidDatasetError, ParseError
from freqprint.utils.files import PathLike, atomic_write_text, read_text_file, safe_name
from freqprint.utils.rng import make_rng

logger = structlog.get_logger(__name__)

SPLIT_FRACTIONS = ((Split.TRAIN, 0.6), (Split.VALIDATION, 0.2))
MIN_ITEMS_PER_CLASS = 5

ManifestEntry = Tuple[str, str, Split]


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def split_counts(m: int) -> Tuple[int, int, int]:
    """Number of train, validation and test items for a class with `m` items.

    >>> split_counts(100)
    (60, 20, 20)
    >>> split_counts(10)
    (6, 2, 2)
    >>> split_counts(7)
    (4, 1, 2)

    """
    n_train = _round_half_up(SPLIT_FRACTIONS[0][1] * m)
    n_val = _round_half_up(SPLIT_FRACTIONS[1][1] * m)
    return n_train, n_val, m - n_train - n_val


def split_dataset(ds: TraceDataset, seed: int) -> TraceDataset:
    """Randomly assign every item to train, validation or test at 60/20/20 per class.

    Deterministic for a fixed seed.
    """
    by_class: Dict[str, List[int]] = {label: [] for label in ds.classes}
    for index, item in enumerate(ds.items):
        by_class[item.label].append(index)

    too_small = {label: len(indices) for label, indices in by_class.items() if len(indices) < MIN_ITEMS_PER_CLASS}
    if too_small:
        raise InvalidDatasetError(
            f"every class needs at least {MIN_ITEMS_PER_CLASS} items to be split", details={"counts": too_small}
        )

    rng = make_rng(seed)
    assignment = [Split.UNASSIGNED] * len(ds.items)
    for label in ds.classes:
        indices = by_class[label]
        order = rng.permutation(len(indices))
        n_train, n_val, _ = split_counts(len(indices))
        for rank, position in enumerate(order):
            if rank < n_train:
                tag = Split.TRAIN
            elif rank < n_train + n_val:
                tag = Split.VALIDATION
            else:
                tag = Split.TEST
            assignment[indices[position]] = tag

    logger.debug("Split dataset", classes=len(ds.classes), items=len(ds.items), seed=seed)
    return ds.with_assignment(assignment)


def training_bounds(ds: TraceDataset) -> Tuple[float, float]:
    """Global (min, max) over the training split, the default normalization bounds.

    Falls back to a unit-wide range when every training sample has the same value.
    """
    train = ds.split(Split.TRAIN)
    if not train:
        raise InvalidDatasetError("dataset has no training items")
    f_min = min(min(item.trace.samples) for item in train)
    f_max = max(max(item.trace.samples) for item in train)
    if f_max <= f_min:
        f_max = f_min + 1
    return float(f_min), float(f_max)


def trace_relpath(label: str, name: str) -> str:
    return f"traces/{safe_name(label)}/{name}.trace"


def format_manifest(entries: List[ManifestEntry]) -> str:
    for label, path, _ in entries:
        if "\t" in label or "\n" in label or "\t" in path:
            raise InvalidDatasetError(f"label {label!r} or path {path!r} can not be stored in a manifest")
    return "".join(f"{label}\t{path}\t{tag}\n" for label, path, tag in entries)


def parse_manifest(text: str) -> List[ManifestEntry]:
    entries: List[ManifestEntry] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        fields = raw.split("\t")
        if len(fields) != 3:
            raise ParseError(f"expected 3 tab separated fields, got {len(fields)}", line=line_no)
        label, path, tag = fields
        if not label:
            raise ParseError("empty label", line=line_no)
        if tag not in Split.values():
            raise ParseError(f"unknown split {tag!r}", line=line_no)
        entries.append((label, path, Split(tag)))
    return entries


def read_manifest(path: PathLike) -> List[ManifestEntry]:
    target = Path(path)
    if not target.exists():
        return []
    return parse_manifest(read_text_file(target))


def write_manifest(path: PathLike, entries: List[ManifestEntry]) -> Path:
    return atomic_write_text(path, format_manifest(entries))


def write_dataset(ds: TraceDataset, directory: PathLike) -> Path:
    """Write every trace file and the manifest; returns the manifest path."""
    root = Path(directory)
    entries: List[ManifestEntry] = []
    per_label: Dict[str, int] = {}
    for item, tag in zip(ds.items, ds.split_assignment):
        directory_key = safe_name(item.label)
        number = per_label.get(directory_key, 0)
        per_label[directory_key] = number + 1
        relpath = trace_relpath(item.label, f"{number:05d}")
        write_trace_file(item.trace, root / relpath)
        entries.append((item.label, relpath, tag))
    manifest = write_manifest(root / MANIFEST_NAME, entries)
    logger.info("Wrote dataset", directory=str(root), items=len(entries), classes=len(ds.classes))
    return manifest


def read_dataset(directory: PathLike) -> TraceDataset:
    root = Path(directory)
    manifest = root / MANIFEST_NAME
    if not manifest.exists():
        raise InvalidDatasetError(f"no {MANIFEST_NAME} in {root}")
    entries = read_manifest(manifest)
    items = [LabeledTrace(trace=read_trace_file(root / path), label=label) for label, path, _ in entries]
    return TraceDataset.from_items(items, [tag for _, _, tag in entries])


def store_assignment(ds: TraceDataset, directory: PathLike) -> Path:
    """Persist the split tags of `ds` into the manifest of a dataset previously read from `directory`."""
    manifest = Path(directory) / MANIFEST_NAME
    entries = read_manifest(manifest)
    if len(entries) != len(ds.items):
        raise InvalidDatasetError("manifest and dataset disagree on the number of items")
    updated = [(label, path, tag) for (label, path, _), tag in zip(entries, ds.split_assignment)]
    return write_manifest(manifest, updated)
