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

"""Accuracy as a function of the number of samples per trace."""

from typing import Dict, Optional, Sequence, Union

import structlog
from tabulate import tabulate

from freqprint.classifier.evaluation import EvalReport, evaluate
from freqprint.classifier.pipeline import default_preprocessing, fit
from freqprint.nn.training import TrainConfig
from freqprint.traces.models import ActivityConfig, TraceDataset
from freqprint.traces.preprocessing import truncate
from freqprint.types import Preset
from freqprint.utils.errors import InvalidArgumentError

logger = structlog.get_logger(__name__)


def sample_size_sweep(
    ds: TraceDataset,
    sizes: Sequence[int],
    preset: Union[str, Preset] = Preset.NATIVE,
    train_cfg: TrainConfig = TrainConfig(),
    gaussian_window: Optional[int] = None,
    movmax_window: Optional[int] = None,
    activity_cfg: ActivityConfig = ActivityConfig(),
) -> Dict[int, EvalReport]:
    """Truncate every trace to each size, train a fresh model with the same seed and evaluate it on the test split."""
    shortest = min((len(item.trace) for item in ds.items), default=0)
    too_long = [size for size in sizes if size > shortest]
    if too_long:
        raise InvalidArgumentError(f"sizes {too_long} exceed the shortest trace ({shortest} samples)")

    results: Dict[int, EvalReport] = {}
    for size in sizes:
        truncated = ds.map_traces(lambda trace: truncate(trace, size))  # noqa: B023
        preprocessing = default_preprocessing(
            truncated, input_length=size, gaussian_window=gaussian_window, movmax_window=movmax_window
        )
        result = fit(truncated, preset, train_cfg, preprocessing)
        results[size] = evaluate(result.model, truncated, activity_cfg=activity_cfg)
        logger.info("Sweep point done", size=size, top1=results[size].top1, best_epoch=result.best_epoch)
    return results


def sweep_table(results: Dict[int, EvalReport]) -> str:
    rows = [(size, f"{r.top1:.4f}", f"{r.top3:.4f}", f"{r.top5:.4f}") for size, r in results.items()]
    return tabulate(rows, headers=["size", "top1", "top3", "top5"], tablefmt="tsv", disable_numparse=True)
