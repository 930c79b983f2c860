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

"""Binary model files.

Layout, all integers little endian::

    b"FPNN"  u32 version  u32 metadata length  metadata (JSON)
    u32 layer count
    per layer: u8 kind  u8 frozen  f64 dropout rate  u32 parameter count
               per parameter: u8 ndim  u32 dim * ndim
    every parameter as little endian f64, in declaration order

The metadata block holds the input shape, the class labels and the preprocessing settings.
"""
import struct
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np
import structlog
from pydantic import ValidationError

from freqprint.nn.layers import Conv1D, Dense, Dropout, Layer, MaxPool1D, ReLU, Softmax
from freqprint.nn.model import CnnModel, PreprocessingConfig
from freqprint.types import LayerKind
from freqprint.utils.errors import FormatError, FreqprintError
from freqprint.utils.files import PathLike, atomic_write_bytes
from freqprint.utils.json import json_dumps, json_loads

logger = structlog.get_logger(__name__)

MAGIC = b"FPNN"
FORMAT_VERSION = 1

_KIND_CODES = {kind: code for code, kind in enumerate(LayerKind)}
_KINDS = {code: kind for kind, code in _KIND_CODES.items()}


def _layer_record(layer: Layer) -> bytes:
    params = list(layer.parameters().values())
    rate = layer.rate if isinstance(layer, Dropout) else 0.0
    record = struct.pack("<BBdI", _KIND_CODES[layer.kind], int(layer.frozen), rate, len(params))
    for value in params:
        record += struct.pack(f"<B{value.ndim}I", value.ndim, *value.shape)
    return record


def model_to_bytes(model: CnnModel) -> bytes:
    metadata = json_dumps(
        {
            "input_shape": list(model.input_shape),
            "classes": list(model.classes),
            "preprocessing": model.preprocessing.dict(),
        }
    ).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(metadata)), metadata]
    parts.append(struct.pack("<I", len(model.layers)))
    parts.extend(_layer_record(layer) for layer in model.layers)
    parts.extend(value.astype("<f8").tobytes() for value in model.get_weights())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise FormatError(f"model file truncated at byte {len(self.data)}, needed {self.offset + size}")
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> Tuple[Any, ...]:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _build_layer(kind: LayerKind, frozen: bool, rate: float, params: List[np.ndarray]) -> Layer:
    expected = 2 if kind in (LayerKind.CONV1D, LayerKind.DENSE) else 0
    if len(params) != expected:
        raise FormatError(f"{kind} layer with {len(params)} parameters")
    if kind == LayerKind.CONV1D:
        return Conv1D(params[0], params[1], frozen=frozen)
    if kind == LayerKind.DENSE:
        return Dense(params[0], params[1], frozen=frozen)
    if kind == LayerKind.DROPOUT:
        return Dropout(rate, frozen=frozen)
    if kind == LayerKind.MAXPOOL1D:
        return MaxPool1D(frozen=frozen)
    if kind == LayerKind.RELU:
        return ReLU(frozen=frozen)
    return Softmax(frozen=frozen)


def model_from_bytes(data: bytes) -> CnnModel:
    reader = _Reader(data)
    if reader.take(len(MAGIC)) != MAGIC:
        raise FormatError("not a model file (bad magic)")
    version, metadata_length = reader.unpack("<II")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported model format version {version}, expected {FORMAT_VERSION}")
    try:
        metadata: Dict[str, Any] = json_loads(reader.take(metadata_length))  # type: ignore[assignment]
        input_shape = tuple(int(d) for d in metadata["input_shape"])
        classes = tuple(metadata["classes"])
        preprocessing = PreprocessingConfig(**metadata["preprocessing"])
    except (ValueError, KeyError, TypeError, ValidationError) as e:
        raise FormatError(f"invalid model metadata: {e}") from e

    (n_layers,) = reader.unpack("<I")
    table = []
    for _ in range(n_layers):
        code, frozen, rate, n_params = reader.unpack("<BBdI")
        if code not in _KINDS:
            raise FormatError(f"unknown layer kind code {code}")
        shapes = []
        for _ in range(n_params):
            (ndim,) = reader.unpack("<B")
            shapes.append(reader.unpack(f"<{ndim}I"))
        table.append((_KINDS[code], bool(frozen), rate, shapes))

    layers = []
    for kind, frozen, rate, shapes in table:
        params = []
        for shape in shapes:
            size = int(np.prod(shape))
            params.append(np.frombuffer(reader.take(8 * size), dtype="<f8").astype(np.float64).reshape(shape))
        try:
            layers.append(_build_layer(kind, frozen, rate, params))
        except FreqprintError as e:
            raise FormatError(f"invalid {kind} layer: {e}") from e
    if reader.offset != len(data):
        raise FormatError(f"{len(data) - reader.offset} trailing bytes after the weights")

    try:
        return CnnModel(layers, input_shape, classes, preprocessing)
    except FreqprintError as e:
        raise FormatError(f"inconsistent model: {e}") from e


def save_model(model: CnnModel, path: PathLike) -> Path:
    target = atomic_write_bytes(path, model_to_bytes(model))
    logger.info("Saved model", path=str(target), parameters=model.parameter_count())
    return target


def load_model(path: PathLike) -> CnnModel:
    return model_from_bytes(Path(path).read_bytes())
