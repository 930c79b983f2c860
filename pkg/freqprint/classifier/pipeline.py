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

"""From traces to network inputs, training a model on a dataset and ranking the classes of one trace."""

from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from freqprint.classifier.presets import build_preset
from freqprint.nn.model import CnnModel, PreprocessingConfig, forward
from freqprint.nn.training import TrainConfig, TrainResult, train
from freqprint.traces.dataset import training_bounds
from freqprint.traces.models import FrequencyTrace, LabeledTrace, TraceDataset
from freqprint.traces.preprocessing import gaussian_smooth, moving_max, normalize, truncate
from freqprint.types import FloatArray, IntArray, Preset, Split
from freqprint.utils.errors import InvalidDatasetError, ShapeError

logger = structlog.get_logger(__name__)


def default_preprocessing(
    ds: TraceDataset,
    input_length: Optional[int] = None,
    gaussian_window: Optional[int] = None,
    movmax_window: Optional[int] = None,
) -> PreprocessingConfig:
    """Preprocessing with normalization bounds taken from the training split.

    The input length defaults to the shortest trace in the dataset.
    """
    if not ds.items:
        raise InvalidDatasetError("dataset is empty")
    f_min, f_max = training_bounds(ds)
    return PreprocessingConfig(
        input_length=input_length or min(len(item.trace) for item in ds.items),
        gaussian_window=gaussian_window,
        movmax_window=movmax_window,
        f_min=f_min,
        f_max=f_max,
    )


def prepare_input(trace: FrequencyTrace, cfg: PreprocessingConfig) -> FloatArray:
    """Truncate, filter and normalize one trace into a (1, input_length) network input."""
    if len(trace) < cfg.input_length:
        raise ShapeError(f"trace has {len(trace)} samples, the model needs {cfg.input_length}")
    trace = truncate(trace, cfg.input_length)
    if cfg.gaussian_window is not None:
        trace = gaussian_smooth(trace, cfg.gaussian_window)
    if cfg.movmax_window is not None:
        trace = moving_max(trace, cfg.movmax_window)
    return normalize(trace, cfg.f_min, cfg.f_max)[None, :]


def to_arrays(
    items: Sequence[LabeledTrace], classes: Sequence[str], cfg: PreprocessingConfig
) -> Tuple[FloatArray, IntArray]:
    """Network inputs of shape (n, 1, input_length) and class indices for labeled traces."""
    index = {label: i for i, label in enumerate(classes)}
    unknown = sorted({item.label for item in items} - index.keys())
    if unknown:
        raise InvalidDatasetError(f"labels unknown to the model: {unknown}")
    x = np.zeros((len(items), 1, cfg.input_length))
    for row, item in enumerate(items):
        x[row] = prepare_input(item.trace, cfg)
    y = np.array([index[item.label] for item in items], dtype=np.int64)
    return x, y


def fit(
    ds: TraceDataset,
    preset: Union[str, Preset] = Preset.NATIVE,
    train_cfg: TrainConfig = TrainConfig(),
    preprocessing: Optional[PreprocessingConfig] = None,
) -> TrainResult:
    """Build a preset model for the dataset classes and train it on the train/validation splits."""
    preprocessing = preprocessing or default_preprocessing(ds)
    model = build_preset(
        preset,
        preprocessing.input_length,
        len(ds.classes),
        seed=train_cfg.seed,
        classes=ds.classes,
        preprocessing=preprocessing,
    )
    train_split = to_arrays(ds.split(Split.TRAIN), ds.classes, preprocessing)
    validation_split = to_arrays(ds.split(Split.VALIDATION), ds.classes, preprocessing)
    return train(model, train_split, validation_split, train_cfg)


def rank(probs: FloatArray, classes: Sequence[str]) -> List[Tuple[str, float]]:
    """Classes ordered by descending probability, ties by class index.

    >>> rank(np.array([0.25, 0.5, 0.25]), ["a", "b", "c"])
    [('b', 0.5), ('a', 0.25), ('c', 0.25)]

    """
    order = sorted(range(len(classes)), key=lambda i: (-probs[i], i))
    return [(classes[i], float(probs[i])) for i in order]


def predict(model: CnnModel, trace: FrequencyTrace) -> List[Tuple[str, float]]:
    """Ranked (label, probability) list for one trace, preprocessed the way the model was trained."""
    probs = forward(model, prepare_input(trace, model.preprocessing))
    return rank(probs, model.classes)
