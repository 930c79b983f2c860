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

"""Reading and writing of `freqprint-trace v1` files.

Layout::

    freqprint-trace v1
    interval_ms=10
    core_id=3
    start_time=1700000000000
    meta.image=redis

    800000
    2800000
    ...

"""
from pathlib import Path
from typing import Dict, List, Optional

import structlog

from freqprint.traces.models import FrequencyTrace
from freqprint.utils.errors import InvalidArgumentError, ParseError
from freqprint.utils.files import PathLike, atomic_write_text, read_text_file
from freqprint.utils.keyvalue import parse_int, split_key_value

logger = structlog.get_logger(__name__)

TRACE_MAGIC = "freqprint-trace v1"
REQUIRED_HEADERS = ("interval_ms", "core_id", "start_time")


def _check_meta_entry(key: str, value: str) -> None:
    if "\n" in key or "\n" in value:
        raise InvalidArgumentError(f"meta entry {key!r} can not be stored in a trace file: line break")
    if "=" in key or key != key.strip():
        raise InvalidArgumentError(f"meta key {key!r} can not be stored in a trace file")


def format_trace(trace: FrequencyTrace) -> str:
    lines = [
        TRACE_MAGIC,
        f"interval_ms={trace.interval_ms}",
        f"core_id={trace.core_id}",
        f"start_time={trace.start_time}",
    ]
    for key, value in trace.meta.items():
        _check_meta_entry(key, value)
        lines.append(f"meta.{key}={value}")
    lines.append("")
    lines.extend(str(s) for s in trace.samples)
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> FrequencyTrace:
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != TRACE_MAGIC:
        raise ParseError(f"expected header {TRACE_MAGIC!r}", line=1)

    headers: Dict[str, int] = {}
    header_lines: Dict[str, int] = {}
    meta: Dict[str, str] = {}
    blank_line: Optional[int] = None
    for index, raw in enumerate(lines[1:], start=1):
        line_no = index + 1
        if not raw.strip():
            blank_line = index
            break
        key, value = split_key_value(raw, line_no)
        if key.startswith("meta."):
            # Meta values are kept verbatim.
            meta[key[len("meta.") :]] = raw.partition("=")[2]
        elif key in REQUIRED_HEADERS:
            headers[key] = parse_int(value, key, line_no)
            header_lines[key] = line_no
        else:
            raise ParseError(f"unknown header {key!r}", line=line_no)

    missing = [key for key in REQUIRED_HEADERS if key not in headers]
    if missing:
        header_end = blank_line + 1 if blank_line is not None else len(lines)
        raise ParseError(f"missing required header(s): {', '.join(missing)}", line=header_end)
    if blank_line is None:
        raise ParseError("missing blank line before the samples section", line=len(lines))
    if headers["interval_ms"] <= 0:
        raise ParseError("interval_ms must be positive", line=header_lines["interval_ms"])

    samples: List[int] = []
    for index, raw in enumerate(lines[blank_line + 1 :], start=blank_line + 2):
        line = raw.strip()
        if not line:
            continue
        if not (line.isascii() and line.isdigit()):
            raise ParseError(f"sample must be a non-negative integer, got {line!r}", line=index)
        samples.append(int(line))
    if not samples:
        raise ParseError("empty samples section", line=len(lines))

    return FrequencyTrace(
        samples=samples,
        interval_ms=headers["interval_ms"],
        core_id=headers["core_id"],
        start_time=headers["start_time"],
        meta=meta,
    )


def write_trace_file(trace: FrequencyTrace, path: PathLike) -> Path:
    return atomic_write_text(path, format_trace(trace))


def read_trace_file(path: PathLike) -> FrequencyTrace:
    return parse_trace(read_text_file(path))
