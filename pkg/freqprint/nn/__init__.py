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

"""A small 1D convolutional network engine on numpy."""

from freqprint.nn.gradcheck import gradient_check
from freqprint.nn.layers import Conv1D, Dense, Dropout, Layer, MaxPool1D, ReLU, Softmax
from freqprint.nn.model import (
    CnnModel,
    PreprocessingConfig,
    backward,
    conv1d_forward,
    cross_entropy,
    forward,
    maxpool1d_forward,
)
from freqprint.nn.serialization import load_model, save_model
from freqprint.nn.training import EpochMetrics, TrainConfig, TrainResult, train

__all__ = [
    "CnnModel",
    "Conv1D",
    "Dense",
    "Dropout",
    "EpochMetrics",
    "Layer",
    "MaxPool1D",
    "PreprocessingConfig",
    "ReLU",
    "Softmax",
    "TrainConfig",
    "TrainResult",
    "backward",
    "conv1d_forward",
    "cross_entropy",
    "forward",
    "gradient_check",
    "load_model",
    "maxpool1d_forward",
    "save_model",
    "train",
]
