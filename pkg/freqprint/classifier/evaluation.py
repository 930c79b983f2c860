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

"""Top-k evaluation, confusion analysis and the activity versus misprediction report."""

from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import structlog
from pydantic import validator
from scipy.stats import spearmanr
from tabulate import tabulate

from freqprint.classifier.pipeline import to_arrays
from freqprint.nn.model import CnnModel
from freqprint.nn.training import predict_proba
from freqprint.traces.models import ActivityConfig, FreqprintBaseModel, TraceDataset
from freqprint.traces.preprocessing import frequency_activity
from freqprint.types import FloatArray, IntArray, Split
from freqprint.utils.errors import InvalidDatasetError
from freqprint.utils.keyvalue import format_key_values

logger = structlog.get_logger(__name__)

TOP_K = (1, 3, 5)


class EvalReport(FreqprintBaseModel):
    classes: Tuple[str, ...]
    top1: float
    top3: float
    top5: float
    # Rows are true classes, columns top-1 predictions.
    confusion: Tuple[Tuple[int, ...], ...]
    misprediction_rate: Tuple[Optional[float], ...]
    mean_activity: Tuple[Optional[float], ...]

    @validator("top5")
    def _monotone(cls, v: float, values: Dict[str, Any]) -> float:
        if not values.get("top1", 0.0) <= values.get("top3", 0.0) <= v:
            raise ValueError("top-k accuracies must be non-decreasing in k")
        return v

    @property
    def test_counts(self) -> Tuple[int, ...]:
        return tuple(sum(row) for row in self.confusion)

    @property
    def n_test(self) -> int:
        return sum(self.test_counts)


class ActivityRow(FreqprintBaseModel):
    label: str
    misprediction_rate: float
    mean_activity: float


class ActivityTable(FreqprintBaseModel):
    rows: Tuple[ActivityRow, ...]
    spearman: Optional[float]


def true_label_ranks(probs: FloatArray, labels: IntArray) -> IntArray:
    """0-based rank of the true class per row; equal probabilities rank by class index.

    >>> true_label_ranks(np.array([[0.2, 0.4, 0.4], [0.5, 0.3, 0.2]]), np.array([2, 0])).tolist()
    [1, 0]

    """
    rows = np.arange(len(labels))
    true = probs[rows, labels][:, None]
    columns = np.arange(probs.shape[1])[None, :]
    ahead = (probs > true) | ((probs == true) & (columns < labels[:, None]))
    return ahead.sum(axis=1)


def report_from_probabilities(
    probs: FloatArray, labels: IntArray, classes: Tuple[str, ...], mean_activity: Tuple[Optional[float], ...]
) -> EvalReport:
    if len(labels) == 0:
        raise InvalidDatasetError("nothing to evaluate")
    ranks = true_label_ranks(probs, labels)
    topk = {k: float(np.mean(ranks < k)) for k in TOP_K}

    n_classes = len(classes)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (labels, probs.argmax(axis=1)), 1)
    totals = confusion.sum(axis=1)
    misprediction = tuple(
        None if total == 0 else float(1 - confusion[i, i] / total) for i, total in enumerate(totals)
    )
    return EvalReport(
        classes=classes,
        top1=topk[1],
        top3=topk[3],
        top5=topk[5],
        confusion=tuple(tuple(int(c) for c in row) for row in confusion),
        misprediction_rate=misprediction,
        mean_activity=mean_activity,
    )


def _mean_activity(
    ds: TraceDataset, split: Optional[Split], classes: Tuple[str, ...], cfg: ActivityConfig
) -> Tuple[Optional[float], ...]:
    items = ds.items if split is None else ds.split(split)
    per_class: Dict[str, List[int]] = {label: [] for label in classes}
    for item in items:
        if item.label in per_class:
            per_class[item.label].append(frequency_activity(item.trace, cfg))
    return tuple(float(np.mean(values)) if values else None for values in per_class.values())


def evaluate(
    model: CnnModel, ds: TraceDataset, split: Split = Split.TEST, activity_cfg: ActivityConfig = ActivityConfig()
) -> EvalReport:
    """Top-1/3/5 accuracy, confusion matrix and per class statistics of `model` on one split of `ds`."""
    items = ds.split(split)
    if not items:
        raise InvalidDatasetError(f"the {split} split is empty")
    x, y = to_arrays(items, model.classes, model.preprocessing)
    report = report_from_probabilities(
        predict_proba(model, x), y, model.classes, _mean_activity(ds, split, model.classes, activity_cfg)
    )
    logger.info("Evaluated model", split=str(split), items=len(items), top1=report.top1, top5=report.top5)
    return report


def _spearman(x: List[float], y: List[float]) -> Optional[float]:
    if len(x) < 2 or len(set(x)) < 2 or len(set(y)) < 2:
        return None
    rho, _ = spearmanr(x, y)
    return None if np.isnan(rho) else float(rho)


def activity_report(report: EvalReport, ds: TraceDataset, cfg: ActivityConfig = ActivityConfig()) -> ActivityTable:
    """Misprediction rate next to mean frequency activity per class, most mispredicted first.

    Mean activity is taken over every trace of the class in `ds`. Classes without test items are left out.
    The Spearman rank correlation is None when it is undefined, for instance when nothing was mispredicted.
    """
    activity = _mean_activity(ds, None, report.classes, cfg)
    rows = [
        (index, ActivityRow(label=label, misprediction_rate=rate, mean_activity=mean))
        for index, (label, rate, mean) in enumerate(zip(report.classes, report.misprediction_rate, activity))
        if rate is not None and mean is not None
    ]
    rows.sort(key=lambda pair: (-pair[1].misprediction_rate, pair[0]))
    ordered = tuple(row for _, row in rows)
    return ActivityTable(
        rows=ordered,
        spearman=_spearman([r.misprediction_rate for r in ordered], [r.mean_activity for r in ordered]),
    )


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def summary(report: EvalReport) -> Dict[str, Any]:
    return {
        "top1": _fmt(report.top1),
        "top3": _fmt(report.top3),
        "top5": _fmt(report.top5),
        "classes": len(report.classes),
        "test_items": report.n_test,
    }


def format_report(report: EvalReport) -> str:
    """Per class tab separated table followed by a key=value summary block."""
    rows = [
        (label, count, _fmt(rate), _fmt(activity))
        for label, count, rate, activity in zip(
            report.classes, report.test_counts, report.misprediction_rate, report.mean_activity
        )
    ]
    headers = ["label", "test_items", "misprediction_rate", "mean_activity"]
    table = tabulate(rows, headers=headers, tablefmt="tsv", disable_numparse=True)
    return f"{table}\n\n{format_key_values(summary(report))}"


def format_activity_table(table: ActivityTable) -> str:
    rows = [(row.label, _fmt(row.misprediction_rate), f"{row.mean_activity:.1f}") for row in table.rows]
    headers = ["label", "misprediction_rate", "mean_activity"]
    text = tabulate(rows, headers=headers, tablefmt="tsv", disable_numparse=True)
    return f"{text}\n\n{format_key_values({'spearman': _fmt(table.spearman), 'classes': len(table.rows)})}"
