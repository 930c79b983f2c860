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

"""Scripted stand-ins for the frequency source, clock and target runner."""
from threading import Lock, current_thread, local
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from freqprint.utils.errors import AccessError, TargetError


class ManualClock:
    """A clock that only moves when somebody sleeps on it.

    Every thread keeps its own time. Other threads start at the time of the thread that created the clock,
    so threads that run ahead never move the clock of their siblings.
    """

    def __init__(self, start: float = 100.0, wall_ms: int = 1_700_000_000_000) -> None:
        self.now = start
        self.start_wall_ms = wall_ms
        self.start = start
        self.deadlines: List[float] = []
        self._lock = Lock()
        self._owner = current_thread()
        self._local = local()

    def _thread_now(self) -> float:
        if current_thread() is self._owner:
            return self.now
        return getattr(self._local, "now", self.now)

    def monotonic(self) -> float:
        with self._lock:
            return self._thread_now()

    def sleep_until(self, deadline: float) -> None:
        with self._lock:
            self.deadlines.append(deadline)
            now = max(self._thread_now(), deadline)
            if current_thread() is self._owner:
                self.now = now
            else:
                self._local.now = now

    def wall_ms(self) -> int:
        with self._lock:
            return self.start_wall_ms + int(round((self._thread_now() - self.start) * 1000))


class ScriptedFrequencySource:
    """Returns scripted readings per core and records the clock time of every read.

    Once a core's script is exhausted its last value repeats. `fail_after` makes the n-th read of a core
    raise an `AccessError`.
    """

    def __init__(
        self,
        scripts: Dict[int, Sequence[int]],
        clock: Optional[ManualClock] = None,
        fail_after: Optional[Dict[int, int]] = None,
    ) -> None:
        self.scripts = {core: list(values) for core, values in scripts.items()}
        self.clock = clock
        self.fail_after = fail_after or {}
        self.reads: Dict[int, List[Tuple[int, Optional[float]]]] = {core: [] for core in scripts}
        self._lock = Lock()

    def read(self, core_id: int) -> int:
        with self._lock:
            reads = self.reads.setdefault(core_id, [])
            index = len(reads)
            if core_id in self.fail_after and index >= self.fail_after[core_id]:
                raise AccessError(f"core {core_id} became unreadable")
            script = self.scripts[core_id]
            value = script[min(index, len(script) - 1)]
            reads.append((value, self.clock.monotonic() if self.clock else None))
            return value

    def read_times(self, core_id: int) -> List[float]:
        return [t for _, t in self.reads[core_id] if t is not None]


class RecordingTargetRunner:
    def __init__(self, failing_launches: Iterable[str] = ()) -> None:
        self.calls: List[Tuple[str, str]] = []
        self.failing_launches = set(failing_launches)

    def launch(self, command: str) -> None:
        self.calls.append(("launch", command))
        if command in self.failing_launches:
            raise TargetError(f"could not launch {command!r}")

    def kill(self, command: str) -> None:
        self.calls.append(("kill", command))

    @property
    def launches(self) -> List[str]:
        return [command for action, command in self.calls if action == "launch"]
