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

"""Finite difference verification of the analytic gradients."""

from typing import List, Optional

import numpy as np
import structlog

from freqprint.nn.layers import MaxPool1D, ReLU
from freqprint.nn.model import CnnModel, backward, cross_entropy, forward
from freqprint.types import FloatArray, Mode
from freqprint.utils.rng import make_rng

logger = structlog.get_logger(__name__)

GRADIENT_FLOOR = 1e-8


def _kink_pattern(model: CnnModel) -> List[FloatArray]:
    """ReLU activity and pooling choices of the last forward pass."""
    pattern = []
    for layer in model.layers:
        if isinstance(layer, ReLU) and layer.active is not None:
            pattern.append(layer.active.copy())
        elif isinstance(layer, MaxPool1D) and layer.argmax is not None:
            pattern.append(layer.argmax.copy())
    return pattern


def _same_pattern(a: List[FloatArray], b: List[FloatArray]) -> bool:
    return len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b))


def gradient_check(
    model: CnnModel,
    input: FloatArray,
    label: int,
    epsilon: float = 1e-4,
    samples_per_param: Optional[int] = None,
    seed: int = 0,
    dropout_seed: Optional[int] = None,
) -> float:
    """Max relative error between analytic and central difference gradients.

    The error of one parameter entry is |g_a - g_n| / max(|g_a|, |g_n|, 1e-8). With `samples_per_param` set,
    only that many randomly chosen entries of every parameter tensor are checked. Dropout stays off unless
    `dropout_seed` is given, in which case every forward pass reuses the same masks.

    Entries whose perturbation flips a ReLU or changes a pooling choice sit on a kink of the loss, where the
    finite difference is meaningless; they are skipped. A model without trainable parameters returns 0.
    """
    mode = Mode.EVAL if dropout_seed is None else Mode.TRAIN
    sample = np.asarray(input, dtype=np.float64)

    def loss() -> float:
        return cross_entropy(forward(model, sample, mode, dropout_seed), label)

    loss()
    reference = _kink_pattern(model)
    analytic = backward(model, sample, label)

    params = model.parameters()
    if not params:
        return 0.0

    rng = make_rng(seed)
    worst = 0.0
    checked = skipped = 0
    for name, value in params.items():
        if samples_per_param is None or samples_per_param >= value.size:
            entries = np.arange(value.size)
        else:
            entries = rng.choice(value.size, size=samples_per_param, replace=False)
        for entry in entries:
            original = value.flat[entry]
            value.flat[entry] = original + epsilon
            plus = loss()
            plus_pattern = _kink_pattern(model)
            value.flat[entry] = original - epsilon
            minus = loss()
            minus_pattern = _kink_pattern(model)
            value.flat[entry] = original
            if not (_same_pattern(reference, plus_pattern) and _same_pattern(reference, minus_pattern)):
                skipped += 1
                continue
            numeric = (plus - minus) / (2 * epsilon)
            exact = float(analytic[name].flat[entry])
            error = abs(exact - numeric) / max(abs(exact), abs(numeric), GRADIENT_FLOOR)
            worst = max(worst, error)
            checked += 1

    logger.debug("Gradient check", checked=checked, skipped=skipped, max_relative_error=worst)
    return worst
