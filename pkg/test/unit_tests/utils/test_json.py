from datetime import datetime

import numpy as np
import pytest
import pytz

from freqprint.types import Split
from freqprint.utils.json import json_dumps, json_loads


def test_numpy_values_serialize():
    data = {"weights": np.arange(3, dtype=np.float64), "count": np.int64(4), "rate": np.float32(0.5)}
    assert json_loads(json_dumps(data)) == {"weights": [0.0, 1.0, 2.0], "count": 4, "rate": 0.5}


def test_enum_tuple_and_datetime_serialize():
    data = {"split": Split.TEST, "shape": (1, 500), "at": datetime(2023, 5, 1, 12, 0, tzinfo=pytz.utc)}
    assert json_loads(json_dumps(data)) == {"split": "test", "shape": [1, 500], "at": "2023-05-01T12:00:00.000+00:00"}


def test_sort_keys():
    assert json_dumps({"b": 1, "a": 2}, sort_keys=True) == '{"a":2,"b":1}'


def test_unknown_object_raises():
    with pytest.raises(TypeError):
        json_dumps({"x": object()})
