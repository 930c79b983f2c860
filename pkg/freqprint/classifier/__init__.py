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

"""The fingerprinting attack: model presets, training, evaluation and reports."""

from freqprint.classifier.evaluation import (
    ActivityRow,
    ActivityTable,
    EvalReport,
    activity_report,
    evaluate,
    format_activity_table,
    format_report,
)
from freqprint.classifier.pipeline import default_preprocessing, fit, predict, prepare_input
from freqprint.classifier.presets import build_preset
from freqprint.classifier.sweep import sample_size_sweep, sweep_table

__all__ = [
    "ActivityRow",
    "ActivityTable",
    "EvalReport",
    "activity_report",
    "build_preset",
    "default_preprocessing",
    "evaluate",
    "fit",
    "format_activity_table",
    "format_report",
    "predict",
    "prepare_input",
    "sample_size_sweep",
    "sweep_table",
]
