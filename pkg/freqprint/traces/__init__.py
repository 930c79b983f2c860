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

"""Frequency traces, datasets, preprocessing and the trace/manifest file formats."""

from freqprint.traces.dataset import read_dataset, split_dataset, training_bounds, write_dataset
from freqprint.traces.io import read_trace_file, write_trace_file
from freqprint.traces.models import ActivityConfig, FrequencyTrace, LabeledTrace, TraceDataset
from freqprint.traces.preprocessing import (
    frequency_activity,
    gaussian_smooth,
    moving_max,
    normalize,
    preprocess_multicore,
    truncate,
)

__all__ = [
    "ActivityConfig",
    "FrequencyTrace",
    "LabeledTrace",
    "TraceDataset",
    "frequency_activity",
    "gaussian_smooth",
    "moving_max",
    "normalize",
    "preprocess_multicore",
    "read_dataset",
    "read_trace_file",
    "split_dataset",
    "training_bounds",
    "truncate",
    "write_dataset",
    "write_trace_file",
]
