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

"""Detection of processes polling cpufreq the way a frequency sampler does.

An attacker reading `scaling_cur_freq` every few milliseconds produces the same short syscall sequence on a
cpufreq path over and over. The detector tracks, per process, complete in-order occurrences of that sequence
among its cpufreq-path syscalls and flags the process once enough occurrences fall inside a sliding window.

Event streams are plain text, one syscall per line::

    <seconds.millis> <pid> <syscall> [path]

"""
from collections import deque
from decimal import Decimal, InvalidOperation
from typing import Deque, Dict, Iterable, List, Optional, Tuple

import structlog
from pydantic import validator

from freqprint.traces.models import FreqprintBaseModel
from freqprint.utils.errors import OrderError, ParseError
from freqprint.utils.files import PathLike, read_text_file
from freqprint.utils.keyvalue import iter_key_values, parse_float, parse_int

logger = structlog.get_logger(__name__)

DEFAULT_PATTERN = ("fstat", "fadvise64", "read", "close")


class SyscallEvent(FreqprintBaseModel):
    timestamp_ms: float
    pid: int
    name: str
    path_arg: Optional[str] = None


class DetectorConfig(FreqprintBaseModel):
    pattern: Tuple[str, ...] = DEFAULT_PATTERN
    path_substring: str = "cpufreq"
    min_repetitions: int = 50
    window_s: float = 10.0
    max_intra_pattern_gap_ms: float = 50.0

    @validator("pattern")
    def _not_empty(cls, v: Tuple[str, ...]) -> Tuple[str, ...]:
        if not v:
            raise ValueError("pattern must not be empty")
        return v

    @validator("min_repetitions")
    def _at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("min_repetitions must be at least 1")
        return v

    @validator("window_s", "max_intra_pattern_gap_ms")
    def _non_negative(cls, v: float) -> float:
        if v < 0:
            raise ValueError("must not be negative")
        return v


class Detection(FreqprintBaseModel):
    pid: int
    first_flag_time_ms: float
    repetition_count: int


class _ProcessMatcher:
    """Streaming state of one pid: the last len(pattern) relevant events and the recent occurrence times."""

    def __init__(self, cfg: DetectorConfig) -> None:
        self.cfg = cfg
        self.window_ms = cfg.window_s * 1000
        self.recent: Deque[SyscallEvent] = deque(maxlen=len(cfg.pattern))
        self.occurrences: Deque[float] = deque()
        self.count = 0
        self.flagged_at: Optional[float] = None

    def _completes_pattern(self) -> bool:
        if len(self.recent) < len(self.cfg.pattern):
            return False
        if any(event.name != name for event, name in zip(self.recent, self.cfg.pattern)):
            return False
        times = [event.timestamp_ms for event in self.recent]
        return all(b - a <= self.cfg.max_intra_pattern_gap_ms for a, b in zip(times, times[1:]))

    def feed(self, event: SyscallEvent) -> None:
        self.recent.append(event)
        if not self._completes_pattern():
            return
        # Occurrences never overlap: the next one starts after this one's last event.
        self.recent.clear()
        now = event.timestamp_ms
        self.count += 1
        self.occurrences.append(now)
        while self.occurrences and self.occurrences[0] <= now - self.window_ms:
            self.occurrences.popleft()
        if self.flagged_at is None and len(self.occurrences) >= self.cfg.min_repetitions:
            self.flagged_at = now


def detect(events: Iterable[SyscallEvent], cfg: DetectorConfig = DetectorConfig()) -> List[Detection]:
    """Flagged processes, ordered by flag time and pid.

    Only events whose path contains `cfg.path_substring` are considered; other syscalls of the same process
    neither advance nor break a match. An occurrence is `cfg.pattern` on consecutive relevant events, each at
    most `max_intra_pattern_gap_ms` after the previous one, and it happens at the time of its last event. A
    process is flagged at the first occurrence that brings the count within the preceding `window_s` seconds
    to `min_repetitions`; `repetition_count` counts all of its occurrences.
    """
    matchers: Dict[int, _ProcessMatcher] = {}
    for event in events:
        if event.path_arg is None or cfg.path_substring not in event.path_arg:
            continue
        matcher = matchers.get(event.pid)
        if matcher is None:
            matcher = matchers[event.pid] = _ProcessMatcher(cfg)
        matcher.feed(event)

    detections = [
        Detection(pid=pid, first_flag_time_ms=m.flagged_at, repetition_count=m.count)
        for pid, m in matchers.items()
        if m.flagged_at is not None
    ]
    detections.sort(key=lambda d: (d.first_flag_time_ms, d.pid))
    for d in detections:
        logger.info("Suspicious frequency polling", pid=d.pid, first_flag_time_ms=d.first_flag_time_ms)
    return detections


def _parse_timestamp(text: str, line_no: int) -> float:
    try:
        seconds = Decimal(text)
    except InvalidOperation:
        raise ParseError(f"invalid timestamp {text!r}", line=line_no) from None
    if not text.isascii() or not seconds.is_finite() or seconds < 0:
        raise ParseError(f"invalid timestamp {text!r}", line=line_no)
    return float(seconds * 1000)


def parse_event_line(line: str, line_no: int) -> SyscallEvent:
    """Parse one event line.

    >>> parse_event_line("12.001 4242 read /sys/devices/system/cpu/cpu3/cpufreq/scaling_cur_freq", 1).timestamp_ms
    12001.0

    """
    fields = line.split(maxsplit=3)
    if len(fields) < 3:
        raise ParseError(f"expected '<seconds> <pid> <syscall> [path]', got {line.strip()!r}", line=line_no)
    timestamp = _parse_timestamp(fields[0], line_no)
    if not (fields[1].isascii() and fields[1].isdigit()):
        raise ParseError(f"invalid pid {fields[1]!r}", line=line_no)
    path = fields[3].strip() if len(fields) == 4 else None
    return SyscallEvent(timestamp_ms=timestamp, pid=int(fields[1]), name=fields[2], path_arg=path)


def parse_event_stream(lines: Iterable[str]) -> List[SyscallEvent]:
    """Events of a stream, in input order; blank lines are skipped.

    Raises:
        ParseError: a malformed line, or input that is not valid UTF-8.
        OrderError: a timestamp going back in time within one pid.

    """
    events: List[SyscallEvent] = []
    last_seen: Dict[int, float] = {}
    line_no = 0
    try:
        for line_no, raw in enumerate(lines, start=1):
            if not raw.strip():
                continue
            event = parse_event_line(raw, line_no)
            previous = last_seen.get(event.pid)
            if previous is not None and event.timestamp_ms < previous:
                raise OrderError(f"timestamp of pid {event.pid} goes back in time", line=line_no)
            last_seen[event.pid] = event.timestamp_ms
            events.append(event)
    except UnicodeDecodeError:
        # Text streams decode ahead in blocks, so only a lower bound of the line is known.
        raise ParseError(f"event stream is not valid UTF-8 after line {line_no}") from None
    return events


def format_detections(detections: Iterable[Detection]) -> str:
    """`pid<TAB>first_flag_time_ms<TAB>count` lines."""
    return "".join(f"{d.pid}\t{d.first_flag_time_ms:.3f}\t{d.repetition_count}\n" for d in detections)


def parse_detector_config(text: str) -> DetectorConfig:
    """Read a detector config from key=value lines; missing keys keep their defaults.

    >>> parse_detector_config("pattern=openat,read\\nmin_repetitions=3").pattern
    ('openat', 'read')

    """
    values: Dict[str, object] = {}
    for line_no, key, value in iter_key_values(text.splitlines()):
        if key == "pattern":
            values[key] = tuple(name.strip() for name in value.split(",") if name.strip())
        elif key == "path_substring":
            values[key] = value
        elif key == "min_repetitions":
            values[key] = parse_int(value, key, line_no)
        elif key in ("window_s", "max_intra_pattern_gap_ms"):
            values[key] = parse_float(value, key, line_no)
        else:
            raise ParseError(f"unknown key {key!r}", line=line_no)
    return DetectorConfig.create(**values)


def read_detector_config(path: PathLike) -> DetectorConfig:
    return parse_detector_config(read_text_file(path))
