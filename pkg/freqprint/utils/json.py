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

"""Functions for serialization to and from JSON.

Model files embed a JSON metadata block (class labels and preprocessing settings). :func:`json_dumps` hands
:func:`to_serializable` to orjson as its `default` hook; it is **only** called for objects orjson can't encode
natively and must return something orjson can encode, or raise :exc:`TypeError`.

orjson serializes numpy arrays natively when `OPT_SERIALIZE_NUMPY` is set, numpy scalars are converted by
:func:`to_serializable`.
"""
from dataclasses import asdict, is_dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import orjson as json
import structlog
from pydantic import BaseModel

from freqprint.utils.datetime import isoformat

PY_JSON_TYPES = Union[Dict[str, Any], List, str, int, float, bool, None, object]

logger = structlog.get_logger(__name__)


def json_loads(s: Union[str, bytes, bytearray]) -> PY_JSON_TYPES:
    return json.loads(s)


def json_dumps(obj: PY_JSON_TYPES, indent: bool = False, sort_keys: bool = False) -> str:
    orjson_options = json.OPT_PASSTHROUGH_DATETIME | json.OPT_SERIALIZE_NUMPY | json.OPT_NON_STR_KEYS
    if sort_keys:
        orjson_options |= json.OPT_SORT_KEYS
    if indent:
        orjson_options |= json.OPT_INDENT_2
    return json.dumps(obj, default=to_serializable, option=orjson_options).decode("utf8")


def to_serializable(o: Any) -> Any:
    """Convert an object into an object that the JSON encoder can serialize.

    >>> to_serializable(np.float64(0.5))
    0.5
    >>> to_serializable(Path("a/b"))
    'a/b'

    Args:
        o: Object to convert.

    Returns:
        Serializable object.

    Raises:
        TypeError: in case no conversion was possible.

    """
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Enum):
        return o.value
    if isinstance(o, Path):
        return str(o)
    if isinstance(o, datetime):
        return isoformat(o)
    if is_dataclass(o) and not isinstance(o, type):
        return asdict(o)
    if isinstance(o, BaseModel):
        return o.dict()
    if isinstance(o, (set, frozenset, tuple)):
        return list(o)
    raise TypeError(f"Could not serialize object of type {o.__class__.__name__} to JSON")
