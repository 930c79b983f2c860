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

"""The two network architectures used for fingerprinting."""

from typing import List, Optional, Sequence, Union

import structlog

from freqprint.nn.layers import Conv1D, Dense, Dropout, Layer, MaxPool1D, ReLU, Softmax
from freqprint.nn.model import CnnModel, PreprocessingConfig
from freqprint.types import Preset
from freqprint.utils.errors import InvalidArgumentError
from freqprint.utils.rng import make_rng

logger = structlog.get_logger(__name__)

MIN_INPUT_LENGTH = 64
DENSE_UNITS = (128, 64)

# Convolution widths per block; a pool and a dropout layer follow every block.
CONV_BLOCKS = {
    Preset.NATIVE: ((16, 32), (64,)),
    Preset.SANDBOX: ((16, 32, 64), (64,)),
}


def _parse_preset(name: Union[str, Preset]) -> Preset:
    try:
        return Preset(name)
    except ValueError:
        raise InvalidArgumentError(f"unknown preset {name!r}, expected one of {Preset.values()}") from None


def build_preset(
    name: Union[str, Preset],
    input_length: int,
    num_classes: int,
    seed: int = 0,
    classes: Sequence[str] = (),
    preprocessing: Optional[PreprocessingConfig] = None,
) -> CnnModel:
    """Build a freshly initialised model.

    `native` stacks three convolutions, `sandbox` four; both use two pool/dropout stages and three dense
    layers, the last one feeding the softmax.
    """
    preset = _parse_preset(name)
    if input_length < MIN_INPUT_LENGTH:
        raise InvalidArgumentError(f"input_length must be at least {MIN_INPUT_LENGTH}, got {input_length}")
    if num_classes < 2:
        raise InvalidArgumentError(f"num_classes must be at least 2, got {num_classes}")

    rng = make_rng(seed)
    layers: List[Layer] = []
    channels, length = 1, input_length
    for block in CONV_BLOCKS[preset]:
        for width in block:
            layers += [Conv1D.initialise(channels, width, rng), ReLU()]
            channels = width
        layers += [MaxPool1D(), Dropout()]
        length //= 2

    features = channels * length
    for units in DENSE_UNITS:
        layers += [Dense.initialise(features, units, rng), ReLU()]
        features = units
    layers += [Dense.initialise(features, num_classes, rng), Softmax()]

    model = CnnModel(layers, (1, input_length), classes, preprocessing)
    logger.debug("Built model", preset=str(preset), input_length=input_length, parameters=model.parameter_count())
    return model
