import time

import numpy as np
import pytest

from freqprint.classifier import build_preset
from freqprint.nn import PreprocessingConfig, conv1d_forward, forward, gradient_check, maxpool1d_forward
from freqprint.nn.serialization import model_from_bytes, model_to_bytes
from test.unit_tests.fixtures.oracles import naive_conv, naive_pool

pytestmark = pytest.mark.acceptance


@pytest.mark.parametrize("preset", ["native", "sandbox"])
def test_gradient_check_on_presets(preset):
    model = build_preset(preset, input_length=500, num_classes=8, seed=5)
    sample = np.random.default_rng(5).uniform(0.0, 1.0, size=(1, 500))

    started = time.perf_counter()
    error = gradient_check(model, sample, label=3, samples_per_param=4, seed=5)

    assert error < 1e-3
    assert time.perf_counter() - started < 60


def test_conv_and_pool_match_brute_force():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        in_channels, out_channels = (int(v) for v in rng.integers(1, 9, size=2))
        length = int(rng.integers(2, 80))
        x = rng.normal(size=(in_channels, length))
        weight = rng.normal(size=(out_channels, in_channels, 3))
        bias = rng.normal(size=out_channels)
        assert np.max(np.abs(conv1d_forward(x, weight, bias) - naive_conv(x, weight, bias))) <= 1e-10
        assert np.array_equal(maxpool1d_forward(x), naive_pool(x))


def test_random_models_survive_serialization():
    rng = np.random.default_rng(9)
    for index in range(10):
        preset = ("native", "sandbox")[index % 2]
        length = int(rng.integers(64, 400))
        n_classes = int(rng.integers(2, 12))
        preprocessing = PreprocessingConfig(
            input_length=length,
            gaussian_window=int(rng.integers(1, 30)),
            movmax_window=None,
            f_min=800_000.0,
            f_max=2_800_000.0,
        )
        model = build_preset(
            preset,
            length,
            n_classes,
            seed=index,
            classes=[f"image-{i}" for i in range(n_classes)],
            preprocessing=preprocessing,
        )
        data = model_to_bytes(model)
        restored = model_from_bytes(data)

        x = rng.uniform(size=(1, length))
        assert np.array_equal(forward(restored, x), forward(model, x))
        assert model_to_bytes(restored) == data
        assert restored.classes == model.classes
        assert restored.preprocessing == preprocessing
