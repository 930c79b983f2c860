import numpy as np
import pytest

from freqprint.classifier import build_preset
from freqprint.nn import Conv1D, Dense, Dropout, MaxPool1D, Softmax, forward
from freqprint.types import Preset
from freqprint.utils.errors import InvalidArgumentError


@pytest.mark.parametrize("preset,convolutions", [(Preset.NATIVE, 3), (Preset.SANDBOX, 4)])
def test_preset_layout(preset, convolutions):
    model = build_preset(preset, 500, 8, seed=0)
    assert model.count(Conv1D) == convolutions
    assert model.count(MaxPool1D) == 2
    assert model.count(Dropout) == 2
    assert model.count(Dense) == 3
    assert isinstance(model.layers[-1], Softmax)
    assert model.input_shape == (1, 500)
    assert model.num_classes == 8
    assert [layer.units for layer in model.layers if isinstance(layer, Dense)] == [128, 64, 8]
    assert forward(model, np.zeros(500)).shape == (8,)


def test_odd_lengths_are_floored_by_pooling():
    model = build_preset("sandbox", 101, 3)
    first_dense = next(layer for layer in model.layers if isinstance(layer, Dense))
    assert first_dense.weight.shape[1] == 64 * (101 // 2 // 2)


def test_presets_are_seeded():
    a, b = build_preset("native", 64, 2, seed=1), build_preset("native", 64, 2, seed=1)
    assert all(np.array_equal(x, y) for x, y in zip(a.get_weights(), b.get_weights()))
    c = build_preset("native", 64, 2, seed=2)
    assert not np.array_equal(a.get_weights()[0], c.get_weights()[0])


@pytest.mark.parametrize("args", [("gramine", 500, 8), ("native", 63, 8), ("native", 500, 1)])
def test_invalid_preset_arguments(args):
    with pytest.raises(InvalidArgumentError):
        build_preset(*args)
