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

"""The CNN model, its forward and backward passes and the loss."""

from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import validator

from freqprint.nn.layers import Conv1D, Layer, MaxPool1D, ParamDict, Shape, Softmax
from freqprint.traces.models import FreqprintBaseModel
from freqprint.types import FloatArray, IntArray, Mode
from freqprint.utils.errors import InvalidArgumentError, ShapeError, StateError
from freqprint.utils.rng import make_rng

logger = structlog.get_logger(__name__)

LOG_CLAMP = 1e-12


class PreprocessingConfig(FreqprintBaseModel):
    """How a raw trace becomes a network input; stored with the model so prediction repeats it exactly."""

    input_length: int
    gaussian_window: Optional[int] = None
    movmax_window: Optional[int] = None
    f_min: float = 0.0
    f_max: float = 1.0

    @validator("input_length")
    def _positive_length(cls, v: int) -> int:
        if v < 1:
            raise ValueError("input_length must be at least 1")
        return v

    @validator("gaussian_window", "movmax_window")
    def _positive_window(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 1:
            raise ValueError("filter windows must be at least 1")
        return v

    @validator("f_max")
    def _ordered_bounds(cls, v: float, values: Dict[str, Any]) -> float:
        if "f_min" in values and v <= values["f_min"]:
            raise ValueError("f_max must exceed f_min")
        return v


class CnnModel:
    """An ordered stack of layers ending in softmax, plus the class labels and preprocessing it was built for.

    The most recent forward pass is recorded so `backward` can check it is differentiating the right input.
    """

    def __init__(
        self,
        layers: Sequence[Layer],
        input_shape: Shape,
        classes: Sequence[str] = (),
        preprocessing: Optional[PreprocessingConfig] = None,
    ) -> None:
        self.layers: List[Layer] = list(layers)
        self.input_shape = tuple(input_shape)
        self.output_shape = self._chain_shapes()
        if not self.layers or not isinstance(self.layers[-1], Softmax):
            raise ShapeError("the final layer must be a softmax")
        self.classes: Tuple[str, ...] = tuple(classes) or tuple(str(i) for i in range(self.output_shape[0]))
        if len(self.classes) != self.num_classes:
            raise ShapeError(f"model has {self.num_classes} outputs but {len(self.classes)} class labels")
        self.preprocessing = preprocessing or PreprocessingConfig(input_length=self.input_length)
        if self.preprocessing.input_length != self.input_length:
            raise ShapeError("preprocessing input_length does not match the model input")
        self._recorded: Optional[FloatArray] = None

    def _chain_shapes(self) -> Shape:
        if len(self.input_shape) != 2:
            raise ShapeError(f"input shape must be (channels, length), got {self.input_shape}")
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.output_shape(shape)
        if len(shape) != 1:
            raise ShapeError(f"model output must be a vector, got shape {shape}")
        return shape

    @property
    def input_length(self) -> int:
        return self.input_shape[1]

    @property
    def num_classes(self) -> int:
        return self.output_shape[0]

    def parameters(self) -> ParamDict:
        """Trainable parameters keyed `<layer index>.<name>`, in declaration order."""
        return {
            f"{index}.{name}": value
            for index, layer in enumerate(self.layers)
            if not layer.frozen
            for name, value in layer.parameters().items()
        }

    def get_weights(self) -> List[FloatArray]:
        """Copies of every parameter, frozen layers included, in declaration order."""
        return [value.copy() for layer in self.layers for value in layer.parameters().values()]

    def set_weights(self, weights: Sequence[FloatArray]) -> None:
        targets = [value for layer in self.layers for value in layer.parameters().values()]
        if len(targets) != len(weights):
            raise ShapeError(f"expected {len(targets)} weight arrays, got {len(weights)}")
        for target, value in zip(targets, weights):
            if target.shape != value.shape:
                raise ShapeError(f"weight shape {value.shape} does not match {target.shape}")
            target[...] = value

    def parameter_count(self) -> int:
        return sum(value.size for layer in self.layers for value in layer.parameters().values())

    def count(self, layer_type: type) -> int:
        return sum(isinstance(layer, layer_type) for layer in self.layers)

    def __repr__(self) -> str:
        return f"CnnModel(input={self.input_shape}, classes={self.num_classes}, layers={self.layers})"


def _as_batch(model: CnnModel, x: FloatArray) -> FloatArray:
    batch = np.asarray(x, dtype=np.float64)
    if batch.ndim == 2:
        batch = batch[:, None, :]
    if batch.shape[1:] != model.input_shape:
        raise ShapeError(f"model expects input of shape {model.input_shape}, got {batch.shape[1:]}")
    return batch


def _as_sample(model: CnnModel, x: FloatArray) -> FloatArray:
    sample = np.asarray(x, dtype=np.float64)
    if sample.ndim == 1:
        sample = sample[None, :]
    if sample.shape != model.input_shape:
        raise ShapeError(f"model expects input of shape {model.input_shape}, got {sample.shape}")
    return sample


def forward_batch(
    model: CnnModel, x: FloatArray, mode: Mode = Mode.EVAL, rng: Optional[np.random.Generator] = None
) -> FloatArray:
    """Class probabilities for a batch of shape (batch, channels, length) or (batch, length)."""
    batch = _as_batch(model, x)
    rng = rng if rng is not None else np.random.default_rng()
    out = batch
    for layer in model.layers:
        out = layer.forward(out, mode, rng)
    model._recorded = batch
    return out


def forward(model: CnnModel, input: FloatArray, mode: Mode = Mode.EVAL, seed: Optional[int] = None) -> FloatArray:
    """Class probabilities for one input of shape (channels, length) or (length,).

    Eval mode is deterministic. In train mode the dropout masks are drawn from a generator seeded with `seed`.
    """
    sample = _as_sample(model, input)
    return forward_batch(model, sample[None], mode, make_rng(seed))[0]


def cross_entropy(probs: FloatArray, label: int) -> float:
    """-log(p[label]), with the probability clamped at 1e-12.

    >>> round(cross_entropy(np.full(4, 0.25), 2), 4)
    1.3863
    >>> cross_entropy(np.array([0.0, 1.0]), 1)
    0.0

    """
    if not 0 <= label < probs.shape[-1]:
        raise InvalidArgumentError(f"label {label} out of range for {probs.shape[-1]} classes")
    return 0.0 - float(np.log(max(float(probs[label]), LOG_CLAMP)))


def batch_cross_entropy(probs: FloatArray, labels: IntArray) -> float:
    """Mean cross entropy over a batch."""
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.log(np.maximum(picked, LOG_CLAMP)).mean())


def backward_batch(model: CnnModel, labels: IntArray) -> ParamDict:
    """Gradients of the mean batch cross entropy of the recorded forward pass.

    The softmax and the loss are differentiated together: d loss / d logits = probs - one_hot.
    """
    if model._recorded is None:
        raise StateError("backward called without a recorded forward pass")
    probs = model.layers[-1].probs  # type: ignore[attr-defined]
    labels = np.asarray(labels, dtype=np.int64)
    if probs is None or probs.shape[0] != len(labels):
        raise StateError("recorded forward pass does not match the labels")
    if np.any((labels < 0) | (labels >= model.num_classes)):
        raise InvalidArgumentError(f"labels must be in [0, {model.num_classes})")

    grad = probs.copy()
    grad[np.arange(len(labels)), labels] -= 1.0
    grad /= len(labels)

    grads: ParamDict = {}
    for index in range(len(model.layers) - 2, -1, -1):
        layer = model.layers[index]
        grad, layer_grads = layer.backward(grad)
        for name, value in layer_grads.items():
            grads[f"{index}.{name}"] = value
    return {key: grads[key] for key in model.parameters()}


def backward(model: CnnModel, input: FloatArray, label: int) -> ParamDict:
    """Gradients of the cross entropy for `input` with respect to every trainable parameter.

    Raises:
        StateError: the last forward pass was not run on `input`.

    """
    sample = _as_sample(model, input)
    recorded = model._recorded
    if recorded is None or recorded.shape[0] != 1 or not np.array_equal(recorded[0], sample):
        raise StateError("backward needs a forward pass recorded on the same input")
    return backward_batch(model, np.array([label]))


def conv1d_forward(input: FloatArray, weights: FloatArray, bias: FloatArray) -> FloatArray:
    """Same-padded stride 1 convolution of one (channels, length) input.

    >>> conv1d_forward(np.array([[1.0, 2.0, 3.0]]), np.ones((1, 1, 3)), np.zeros(1)).tolist()
    [[3.0, 6.0, 5.0]]

    """
    x = np.asarray(input, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if x.ndim != 2 or weights.ndim != 3 or weights.shape[1] != x.shape[0]:
        raise ShapeError(f"input {x.shape} does not match weights {weights.shape}")
    return Conv1D(weights, np.asarray(bias, dtype=np.float64)).forward(x[None], Mode.EVAL, np.random.default_rng())[0]


def maxpool1d_forward(input: FloatArray) -> FloatArray:
    """Max over non-overlapping windows of two of one (channels, length) input.

    >>> maxpool1d_forward(np.array([[1.0, 3.0, 2.0, 2.0]])).tolist()
    [[3.0, 2.0]]

    """
    x = np.asarray(input, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ShapeError(f"expected (channels, length) input, got {x.shape}")
    return MaxPool1D().forward(x[None], Mode.EVAL, np.random.default_rng())[0]
