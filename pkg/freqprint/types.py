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

from enum import Enum
from typing import Any, Dict, List, Union

import numpy as np
import numpy.typing as npt

JSON = Any
# An ErrorDict should have the following keys:
# error: str  # A message describing the error
# class: str  # The exception class name (type)
# details: Optional[JSON]  # Extra information attached to a FreqprintError
# traceback: Optional[str]  # A python traceback as a string formatted by nwastdlib.ex.show_ex
ErrorDict = Dict[str, Union[str, int, List[Dict[str, Any]], None]]

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]


class strEnum(str, Enum):
    def __str__(self) -> str:
        return self.value

    @classmethod
    def values(cls) -> List:
        return [obj.value for obj in cls]


class Split(strEnum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"
    UNASSIGNED = "unassigned"


class Mode(strEnum):
    TRAIN = "train"
    EVAL = "eval"


class LayerKind(strEnum):
    CONV1D = "conv1d"
    MAXPOOL1D = "maxpool1d"
    DROPOUT = "dropout"
    DENSE = "dense"
    RELU = "relu"
    SOFTMAX = "softmax"


class Preset(strEnum):
    NATIVE = "native"
    SANDBOX = "sandbox"
