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

"""Batched numpy layers of the 1D CNN.

Activations flow as float64 arrays of shape (batch, channels, length) until a `Dense` layer flattens them to
(batch, units). Every layer caches what its backward pass needs during `forward`; `backward` takes the
upstream gradient and returns the input gradient together with the gradients of its own parameters.
"""
from typing import Dict, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from freqprint.types import FloatArray, IntArray, LayerKind, Mode
from freqprint.utils.errors import InvalidArgumentError, ShapeError, StateError

KERNEL_SIZE = 3
POOL_SIZE = 2
DEFAULT_DROPOUT_RATE = 0.5

Shape = Tuple[int, ...]
ParamDict = Dict[str, FloatArray]


def he_uniform(shape: Shape, fan_in: int, rng: np.random.Generator) -> FloatArray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    kind: LayerKind

    def __init__(self, frozen: bool = False) -> None:
        self.frozen = frozen

    def parameters(self) -> ParamDict:
        return {}

    def output_shape(self, shape: Shape) -> Shape:
        return shape

    def forward(self, x: FloatArray, mode: Mode, rng: np.random.Generator) -> FloatArray:
        raise NotImplementedError

    def backward(self, grad: FloatArray) -> Tuple[FloatArray, ParamDict]:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


def _require(cache: Optional[FloatArray], layer: Layer) -> FloatArray:
    if cache is None:
        raise StateError(f"{layer!r}: backward called before forward")
    return cache


class Conv1D(Layer):
    """Stride 1 convolution with zero 'same' padding.

    out[b, o, i] = bias[o] + sum over c, k of weight[o, c, k] * x[b, c, i + k - pad]
    """

    kind = LayerKind.CONV1D

    def __init__(self, weight: FloatArray, bias: FloatArray, frozen: bool = False) -> None:
        super().__init__(frozen)
        if weight.ndim != 3 or weight.shape[2] % 2 != 1:
            raise ShapeError(f"conv weight must be (out, in, odd kernel), got {weight.shape}")
        if bias.shape != (weight.shape[0],):
            raise ShapeError(f"conv bias must be ({weight.shape[0]},), got {bias.shape}")
        self.weight = weight.astype(np.float64)
        self.bias = bias.astype(np.float64)
        self._padded: Optional[FloatArray] = None

    @classmethod
    def initialise(
        cls, in_channels: int, out_channels: int, rng: np.random.Generator, kernel_size: int = KERNEL_SIZE
    ) -> "Conv1D":
        weight = he_uniform((out_channels, in_channels, kernel_size), in_channels * kernel_size, rng)
        return cls(weight, np.zeros(out_channels))

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def pad(self) -> int:
        return self.weight.shape[2] // 2

    def parameters(self) -> ParamDict:
        return {"weight": self.weight, "bias": self.bias}

    def output_shape(self, shape: Shape) -> Shape:
        if len(shape) != 2 or shape[0] != self.in_channels:
            raise ShapeError(f"{self!r} expects ({self.in_channels}, length) input, got {shape}")
        return self.weight.shape[0], shape[1]

    def forward(self, x: FloatArray, mode: Mode, rng: np.random.Generator) -> FloatArray:
        if x.ndim != 3 or x.shape[1] != self.in_channels:
            raise ShapeError(f"{self!r} expects (batch, {self.in_channels}, length) input, got {x.shape}")
        self._padded = np.pad(x, ((0, 0), (0, 0), (self.pad, self.pad)))
        windows = sliding_window_view(self._padded, self.weight.shape[2], axis=2)  # (b, c, length, k)
        out = np.tensordot(windows, self.weight, axes=([1, 3], [1, 2]))  # (b, length, o)
        return out.transpose(0, 2, 1) + self.bias[None, :, None]

    def backward(self, grad: FloatArray) -> Tuple[FloatArray, ParamDict]:
        padded = _require(self._padded, self)
        kernel = self.weight.shape[2]
        length = grad.shape[2]
        windows = sliding_window_view(padded, kernel, axis=2)
        grads: ParamDict = {}
        if not self.frozen:
            grads = {
                "weight": np.tensordot(grad, windows, axes=([0, 2], [0, 2])),
                "bias": grad.sum(axis=(0, 2)),
            }
        columns = np.tensordot(grad, self.weight, axes=([1], [0]))  # (b, length, c, k)
        dx = np.zeros_like(padded)
        for k in range(kernel):
            dx[:, :, k : k + length] += columns[:, :, :, k].transpose(0, 2, 1)
        return dx[:, :, self.pad : self.pad + length], grads

    def __repr__(self) -> str:
        out_channels, in_channels, kernel = self.weight.shape
        return f"Conv1D(in={in_channels}, out={out_channels}, kernel={kernel})"


class MaxPool1D(Layer):
    """Non-overlapping max over windows of two; a trailing odd sample is dropped. Ties pick the first."""

    kind = LayerKind.MAXPOOL1D

    def __init__(self, frozen: bool = False) -> None:
        super().__init__(frozen)
        self._argmax: Optional[IntArray] = None
        self._input_shape: Shape = ()

    def output_shape(self, shape: Shape) -> Shape:
        if len(shape) != 2 or shape[1] < POOL_SIZE:
            raise ShapeError(f"max pooling needs (channels, length >= {POOL_SIZE}) input, got {shape}")
        return shape[0], shape[1] // POOL_SIZE

    def forward(self, x: FloatArray, mode: Mode, rng: np.random.Generator) -> FloatArray:
        if x.ndim != 3 or x.shape[2] < POOL_SIZE:
            raise ShapeError(f"max pooling needs (batch, channels, length >= {POOL_SIZE}) input, got {x.shape}")
        batch, channels, length = x.shape
        out_length = length // POOL_SIZE
        windows = x[:, :, : out_length * POOL_SIZE].reshape(batch, channels, out_length, POOL_SIZE)
        self._argmax = windows.argmax(axis=3)
        self._input_shape = x.shape
        return np.take_along_axis(windows, self._argmax[..., None], axis=3)[..., 0]

    def backward(self, grad: FloatArray) -> Tuple[FloatArray, ParamDict]:
        argmax = _require(self._argmax, self)
        batch, channels, length = self._input_shape
        out_length = argmax.shape[2]
        routed = np.zeros((batch, channels, out_length, POOL_SIZE))
        np.put_along_axis(routed, argmax[..., None], grad[..., None], axis=3)
        dx = np.zeros(self._input_shape)
        dx[:, :, : out_length * POOL_SIZE] = routed.reshape(batch, channels, out_length * POOL_SIZE)
        return dx, {}

    @property
    def argmax(self) -> Optional[IntArray]:
        return self._argmax


class Dropout(Layer):
    """Inverted dropout: active in train mode only, surviving activations are scaled by 1 / (1 - rate)."""

    kind = LayerKind.DROPOUT

    def __init__(self, rate: float = DEFAULT_DROPOUT_RATE, frozen: bool = False) -> None:
        super().__init__(frozen)
        if not 0.0 < rate < 1.0:
            raise InvalidArgumentError(f"dropout rate must be in (0, 1), got {rate}")
        self.rate = rate
        self._mask: Optional[FloatArray] = None

    def forward(self, x: FloatArray, mode: Mode, rng: np.random.Generator) -> FloatArray:
        if mode != Mode.TRAIN:
            self._mask = None
            return x
        self._mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, grad: FloatArray) -> Tuple[FloatArray, ParamDict]:
        if self._mask is None:
            return grad, {}
        return grad * self._mask, {}

    def __repr__(self) -> str:
        return f"Dropout(rate={self.rate})"


class Dense(Layer):
    """Fully connected layer; flattens (batch, channels, length) input in row-major order."""

    kind = LayerKind.DENSE

    def __init__(self, weight: FloatArray, bias: FloatArray, frozen: bool = False) -> None:
        super().__init__(frozen)
        if weight.ndim != 2:
            raise ShapeError(f"dense weight must be (units, inputs), got {weight.shape}")
        if bias.shape != (weight.shape[0],):
            raise ShapeError(f"dense bias must be ({weight.shape[0]},), got {bias.shape}")
        self.weight = weight.astype(np.float64)
        self.bias = bias.astype(np.float64)
        self._flat: Optional[FloatArray] = None
        self._input_shape: Shape = ()

    @classmethod
    def initialise(cls, in_features: int, units: int, rng: np.random.Generator) -> "Dense":
        return cls(he_uniform((units, in_features), in_features, rng), np.zeros(units))

    @property
    def units(self) -> int:
        return self.weight.shape[0]

    def parameters(self) -> ParamDict:
        return {"weight": self.weight, "bias": self.bias}

    def output_shape(self, shape: Shape) -> Shape:
        if int(np.prod(shape)) != self.weight.shape[1]:
            raise ShapeError(f"{self!r} expects {self.weight.shape[1]} inputs, got shape {shape}")
        return (self.units,)

    def forward(self, x: FloatArray, mode: Mode, rng: np.random.Generator) -> FloatArray:
        self._input_shape = x.shape
        flat = x.reshape(x.shape[0], -1)
        if flat.shape[1] != self.weight.shape[1]:
            raise ShapeError(f"{self!r} expects {self.weight.shape[1]} inputs, got {flat.shape[1]}")
        self._flat = flat
        return flat @ self.weight.T + self.bias

    def backward(self, grad: FloatArray) -> Tuple[FloatArray, ParamDict]:
        flat = _require(self._flat, self)
        grads: ParamDict = {}
        if not self.frozen:
            grads = {"weight": grad.T @ flat, "bias": grad.sum(axis=0)}
        return (grad @ self.weight).reshape(self._input_shape), grads

    def __repr__(self) -> str:
        return f"Dense(in={self.weight.shape[1]}, units={self.units})"


class ReLU(Layer):
    kind = LayerKind.RELU

    def __init__(self, frozen: bool = False) -> None:
        super().__init__(frozen)
        self._active: Optional[FloatArray] = None

    def forward(self, x: FloatArray, mode: Mode, rng: np.random.Generator) -> FloatArray:
        self._active = x > 0
        return np.where(self._active, x, 0.0)

    def backward(self, grad: FloatArray) -> Tuple[FloatArray, ParamDict]:
        # The derivative at exactly zero is taken as 0.
        return grad * _require(self._active, self), {}

    @property
    def active(self) -> Optional[FloatArray]:
        return self._active


def softmax(logits: FloatArray) -> FloatArray:
    """Numerically stable softmax over the last axis.

    >>> softmax(np.zeros(4)).tolist()
    [0.25, 0.25, 0.25, 0.25]

    """
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


class Softmax(Layer):
    kind = LayerKind.SOFTMAX

    def __init__(self, frozen: bool = False) -> None:
        super().__init__(frozen)
        self._probs: Optional[FloatArray] = None

    def output_shape(self, shape: Shape) -> Shape:
        if len(shape) != 1:
            raise ShapeError(f"softmax expects (units,) input, got {shape}")
        return shape

    def forward(self, x: FloatArray, mode: Mode, rng: np.random.Generator) -> FloatArray:
        self._probs = softmax(x)
        return self._probs

    @property
    def probs(self) -> Optional[FloatArray]:
        return self._probs

    def backward(self, grad: FloatArray) -> Tuple[FloatArray, ParamDict]:
        probs = _require(self._probs, self)
        return probs * (grad - (grad * probs).sum(axis=-1, keepdims=True)), {}
