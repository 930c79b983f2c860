import numpy as np
import pytest

from freqprint.nn import CnnModel, Conv1D, Dense, MaxPool1D, ReLU, Softmax
from freqprint.synth import SynthConfig, default_template_bank, generate
from freqprint.traces import FrequencyTrace, split_dataset
from test.unit_tests.fixtures.doubles import ManualClock, RecordingTargetRunner

SMALL_SAMPLES = 128


@pytest.fixture
def manual_clock():
    return ManualClock()


@pytest.fixture
def target_runner():
    return RecordingTargetRunner()


@pytest.fixture
def trace():
    return FrequencyTrace(
        samples=[800_000, 2_800_000, 2_800_000, 1_400_000, 800_000, 800_000],
        interval_ms=10,
        core_id=3,
        start_time=1_700_000_000_000,
        meta={"image": "redis:7.2", "args": "minimal"},
    )


@pytest.fixture(scope="session")
def small_bank():
    return default_template_bank(3, SMALL_SAMPLES, seed=3)


@pytest.fixture(scope="session")
def small_dataset(small_bank):
    cfg = SynthConfig(templates=tuple(small_bank), n_samples=SMALL_SAMPLES, traces_per_class=10, seed=1)
    return split_dataset(generate(cfg), seed=0)


@pytest.fixture
def tiny_model():
    """Conv(1->2) relu pool dense(16->3) softmax on inputs of length 16."""
    rng = np.random.default_rng(7)
    layers = [
        Conv1D.initialise(1, 2, rng),
        ReLU(),
        MaxPool1D(),
        Dense.initialise(2 * 8, 3, rng),
        Softmax(),
    ]
    return CnnModel(layers, (1, 16), classes=("a", "b", "c"))
