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

"""Helpers for the `key=value` text formats used by trace files, template banks, campaign specs and logs."""

from typing import Any, Iterable, Iterator, List, Mapping, Tuple

from freqprint.utils.errors import ParseError


def split_key_value(line: str, line_no: int) -> Tuple[str, str]:
    """Split one `key=value` line.

    >>> split_key_value("interval_ms=10", 2)
    ('interval_ms', '10')
    >>> split_key_value("meta.cmd=docker run -e A=B", 5)
    ('meta.cmd', 'docker run -e A=B')
    >>> split_key_value("garbage", 3)
    Traceback (most recent call last):
        ...
    freqprint.utils.errors.ParseError: line 3: expected key=value, got 'garbage'

    """
    key, sep, value = line.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ParseError(f"expected key=value, got {line!r}", line=line_no)
    return key, value.strip()


def iter_key_values(lines: Iterable[str], first_line_no: int = 1) -> Iterator[Tuple[int, str, str]]:
    """Yield `(line_no, key, value)` for every non-blank, non-comment line."""
    for line_no, raw in enumerate(lines, start=first_line_no):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, value = split_key_value(line, line_no)
        yield line_no, key, value


def parse_int(value: str, key: str, line_no: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"{key} must be an integer, got {value!r}", line=line_no) from None


def parse_float(value: str, key: str, line_no: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ParseError(f"{key} must be a number, got {value!r}", line=line_no) from None


def parse_int_list(value: str, key: str, line_no: int) -> List[int]:
    """Parse a comma separated list of integers.

    >>> parse_int_list("0, 2,3", "cores", 1)
    [0, 2, 3]

    """
    return [parse_int(part.strip(), key, line_no) for part in value.split(",") if part.strip()]


def format_key_values(values: Mapping[str, Any]) -> str:
    """Render a mapping as `key=value` lines.

    >>> print(format_key_values({"top1": 0.5, "classes": 3}), end="")
    top1=0.5
    classes=3

    """
    return "".join(f"{key}={value}\n" for key, value in values.items())
