import numpy as np
import pytest

from freqprint.classifier import (
    EvalReport,
    activity_report,
    build_preset,
    default_preprocessing,
    evaluate,
    format_activity_table,
    format_report,
)
from freqprint.classifier.evaluation import report_from_probabilities, true_label_ranks
from freqprint.traces import ActivityConfig, FrequencyTrace, LabeledTrace, TraceDataset, frequency_activity
from freqprint.types import Split
from freqprint.utils.errors import InvalidDatasetError

SIX = tuple("abcdef")


def _rows(text):
    table, _, summary = text.partition("\n\n")
    rows = [[cell.strip() for cell in line.split("\t")] for line in table.splitlines()]
    values = dict(line.split("=", 1) for line in summary.splitlines())
    return rows, values


@pytest.fixture
def six_class_report():
    probs = np.array(
        [
            [0.5, 0.1, 0.1, 0.1, 0.1, 0.1],
            [0.3, 0.05, 0.25, 0.2, 0.1, 0.1],
            [0.3, 0.25, 0.1, 0.15, 0.12, 0.08],
        ]
    )
    return report_from_probabilities(probs, np.array([0, 1, 2]), SIX, (10.0, 20.0, 30.0, None, None, None))


def test_topk_accuracies(six_class_report):
    assert six_class_report.top1 == pytest.approx(1 / 3)
    assert six_class_report.top3 == pytest.approx(1 / 3)
    assert six_class_report.top5 == pytest.approx(2 / 3)


def test_confusion_and_misprediction(six_class_report):
    assert six_class_report.confusion[0] == (1, 0, 0, 0, 0, 0)
    assert six_class_report.confusion[1] == (1, 0, 0, 0, 0, 0)
    assert six_class_report.confusion[2] == (1, 0, 0, 0, 0, 0)
    assert six_class_report.misprediction_rate == (0.0, 1.0, 1.0, None, None, None)
    assert six_class_report.test_counts == (1, 1, 1, 0, 0, 0)
    assert six_class_report.n_test == 3


def test_true_label_ranks_break_ties_by_class_index():
    probs = np.full((3, 4), 0.25)
    assert true_label_ranks(probs, np.array([0, 2, 3])).tolist() == [0, 2, 3]


def test_report_needs_items():
    with pytest.raises(InvalidDatasetError):
        report_from_probabilities(np.zeros((0, 2)), np.zeros(0, dtype=np.int64), ("a", "b"), (None, None))


def test_report_rejects_decreasing_topk():
    with pytest.raises(ValueError):
        EvalReport(
            classes=("a",),
            top1=0.9,
            top3=0.5,
            top5=1.0,
            confusion=((1,),),
            misprediction_rate=(0.0,),
            mean_activity=(0.0,),
        )


def test_format_report(six_class_report):
    rows, summary = _rows(format_report(six_class_report))
    assert rows[0] == ["label", "test_items", "misprediction_rate", "mean_activity"]
    assert rows[1] == ["a", "1", "0.0000", "10.0000"]
    assert rows[4] == ["d", "0", "n/a", "n/a"]
    assert summary == {"top1": "0.3333", "top3": "0.3333", "top5": "0.6667", "classes": "6", "test_items": "3"}


def _activity_dataset(activity_by_label):
    items = []
    for label, active in activity_by_label.items():
        samples = [2_000_000] * active + [800_000] * (400 - active)
        items.append(LabeledTrace(trace=FrequencyTrace(samples=samples, interval_ms=10), label=label))
    return TraceDataset.from_items(items)


def _report(classes, rates):
    confusion = tuple(tuple(10 if i == j else 0 for j in range(len(classes))) for i in range(len(classes)))
    return EvalReport(
        classes=classes,
        top1=0.5,
        top3=1.0,
        top5=1.0,
        confusion=confusion,
        misprediction_rate=rates,
        mean_activity=(None,) * len(classes),
    )


def test_activity_report_orders_and_correlates():
    ds = _activity_dataset({"x": 300, "y": 200, "z": 100, "w": 50})
    report = _report(("x", "y", "z", "w"), (0.0, 0.5, 1.0, None))

    table = activity_report(report, ds)

    assert [row.label for row in table.rows] == ["z", "y", "x"]
    assert [row.mean_activity for row in table.rows] == [100.0, 200.0, 300.0]
    assert table.spearman == pytest.approx(-1.0)


def test_activity_report_ties_keep_class_order():
    ds = _activity_dataset({"x": 300, "y": 200, "z": 100})
    table = activity_report(_report(("x", "y", "z"), (0.5, 0.5, 0.0)), ds)
    assert [row.label for row in table.rows] == ["x", "y", "z"]


def test_activity_report_without_mispredictions_has_no_correlation():
    ds = _activity_dataset({"x": 300, "y": 200})
    table = activity_report(_report(("x", "y"), (0.0, 0.0)), ds)
    assert table.spearman is None
    rows, summary = _rows(format_activity_table(table))
    assert rows[0] == ["label", "misprediction_rate", "mean_activity"]
    assert rows[1] == ["x", "0.0000", "300.0"]
    assert summary == {"spearman": "n/a", "classes": "2"}


def test_activity_threshold_is_configurable():
    ds = _activity_dataset({"x": 300, "y": 200})
    table = activity_report(_report(("x", "y"), (0.0, 1.0)), ds, ActivityConfig(threshold_khz=3_000_000))
    assert [row.mean_activity for row in table.rows] == [0.0, 0.0]


def test_evaluate_untrained_model(small_dataset):
    preprocessing = default_preprocessing(small_dataset)
    model = build_preset("native", 128, 3, classes=small_dataset.classes, preprocessing=preprocessing)

    report = evaluate(model, small_dataset)

    test_items = small_dataset.split(Split.TEST)
    assert report.n_test == len(test_items)
    assert report.top5 == 1.0
    assert report.classes == small_dataset.classes
    for label, mean in zip(report.classes, report.mean_activity):
        values = [frequency_activity(item.trace) for item in test_items if item.label == label]
        assert mean == pytest.approx(np.mean(values))


def test_evaluate_empty_split(small_dataset):
    model = build_preset("native", 128, 3, classes=small_dataset.classes)
    with pytest.raises(InvalidDatasetError):
        evaluate(model, small_dataset, Split.UNASSIGNED)
