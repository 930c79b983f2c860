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

from typing import Dict, List, Optional

import structlog
from nwastdlib.ex import show_ex

from freqprint.types import JSON, ErrorDict

logger = structlog.get_logger(__name__)


class FreqprintError(Exception):
    """Base class of every error raised by freqprint.

    All errors carry a human readable `message` and optional machine readable `details`.
    """

    message: str
    details: JSON

    def __init__(self, message: str, details: JSON = None) -> None:
        super().__init__(message, details)
        self.message = message
        self.details = details

    def __str__(self) -> str:
        return self.message


class InvalidArgumentError(FreqprintError, ValueError):
    pass


class InvalidDatasetError(FreqprintError):
    pass


class ParseError(FreqprintError):
    """Malformed input; `line` is the 1-based line number of the offending input line, if known."""

    line: Optional[int]

    def __init__(self, message: str, line: Optional[int] = None, details: JSON = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, details)
        self.line = line


class OrderError(ParseError):
    pass


class ShapeError(FreqprintError):
    pass


class StateError(FreqprintError):
    pass


class FormatError(FreqprintError):
    pass


class UnsupportedPlatformError(FreqprintError):
    pass


class AccessError(FreqprintError):
    pass


class PlatformError(FreqprintError):
    pass


class TargetError(FreqprintError):
    pass


class PartialMeasurementError(FreqprintError):
    """A measurement aborted halfway; `partial` maps core id to the samples read before the failure."""

    partial: Dict[int, List[int]]

    def __init__(self, message: str, partial: Dict[int, List[int]], details: JSON = None) -> None:
        super().__init__(message, details)
        self.partial = partial


def error_state_to_dict(err: Exception) -> ErrorDict:
    """Return an ErrorDict based on the exception.

    Args:
        err: Exception

    Returns:
        An ErrorDict containing the error class, message, details and a traceback if available

    """
    if isinstance(err, FreqprintError):
        return {"class": type(err).__name__, "error": err.message, "traceback": show_ex(err), "details": err.details}
    return {"class": type(err).__name__, "error": str(err), "traceback": show_ex(err)}
