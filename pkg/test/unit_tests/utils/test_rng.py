import numpy as np
import pytest

from freqprint.utils.rng import SEED_MASK, make_rng, seed_entropy


@pytest.mark.parametrize("seed", [-1, -(2**70), 2**64 + 5, (3, -4, 5)])
def test_any_integer_seed_is_accepted(seed):
    first = make_rng(seed).integers(0, 1_000_000, size=8)
    second = make_rng(seed).integers(0, 1_000_000, size=8)
    assert np.array_equal(first, second)


def test_non_negative_seeds_keep_their_numpy_stream():
    assert np.array_equal(make_rng(42).random(5), np.random.default_rng(42).random(5))
    assert np.array_equal(make_rng((1, 2, 3)).random(5), np.random.default_rng([1, 2, 3]).random(5))


def test_negative_seeds_wrap_around():
    assert seed_entropy(-1) == SEED_MASK
    assert not np.array_equal(make_rng(-1).random(5), make_rng(1).random(5))


def test_unseeded_generator():
    assert isinstance(make_rng(), np.random.Generator)
