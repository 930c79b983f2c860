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

"""Injectable sources of frequency readings, time and target processes.

Production code reads the cpufreq sysfs interface, sleeps on the system clock and launches targets through
the shell. Tests substitute scripted implementations of the same protocols.
"""
import re
import subprocess  # noqa: S404
import time
from pathlib import Path
from typing import List, Optional, Protocol, Tuple

import structlog

from freqprint.settings import SYSFS_CPU_ROOT
from freqprint.utils.datetime import now_ms
from freqprint.utils.errors import AccessError, TargetError, UnsupportedPlatformError

logger = structlog.get_logger(__name__)

_CPU_DIR = re.compile(r"^cpu(\d+)$")


class FrequencySource(Protocol):
    def read(self, core_id: int) -> int:
        ...


class Clock(Protocol):
    def monotonic(self) -> float:
        ...

    def sleep_until(self, deadline: float) -> None:
        ...

    def wall_ms(self) -> int:
        ...


class TargetRunner(Protocol):
    def launch(self, command: str) -> None:
        ...

    def kill(self, command: str) -> None:
        ...


def parse_frequency(text: str) -> int:
    """Parse the content of a cpufreq attribute.

    >>> parse_frequency("2800000\\n")
    2800000

    """
    value = int(text.strip())
    if value < 0:
        raise ValueError(f"negative frequency {value}")
    return value


def _cpufreq_attribute(core_id: int, name: str, root: Path) -> Path:
    return root / f"cpu{core_id}" / "cpufreq" / name


def _read_attribute(core_id: int, name: str, root: Path) -> int:
    path = _cpufreq_attribute(core_id, name, root)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise UnsupportedPlatformError(f"{path} does not exist", details={"core_id": core_id}) from None
    except PermissionError:
        raise AccessError(f"permission denied reading {path}", details={"core_id": core_id}) from None
    try:
        return parse_frequency(text)
    except ValueError:
        raise UnsupportedPlatformError(f"{path} does not contain a frequency: {text!r}") from None


def read_core_frequency(core_id: int, root: Path = SYSFS_CPU_ROOT) -> int:
    """Current frequency of `core_id` in kHz, from `scaling_cur_freq`."""
    return _read_attribute(core_id, "scaling_cur_freq", root)


def read_core_limits(core_id: int, root: Path = SYSFS_CPU_ROOT) -> Tuple[int, int]:
    """Hardware (min, max) frequency of `core_id` in kHz."""
    return _read_attribute(core_id, "cpuinfo_min_freq", root), _read_attribute(core_id, "cpuinfo_max_freq", root)


def discover_cores(root: Path = SYSFS_CPU_ROOT) -> List[int]:
    """Sorted ids of all cores exposing `scaling_cur_freq`; empty when cpufreq is unavailable."""
    try:
        entries = list(root.iterdir())
    except OSError:
        logger.debug("No cpu directory available", root=str(root))
        return []
    cores = set()
    for entry in entries:
        match = _CPU_DIR.match(entry.name)
        if match and _cpufreq_attribute(int(match.group(1)), "scaling_cur_freq", root).exists():
            cores.add(int(match.group(1)))
    return sorted(cores)


class SysfsFrequencySource:
    def __init__(self, root: Path = SYSFS_CPU_ROOT) -> None:
        self.root = root

    def read(self, core_id: int) -> int:
        return read_core_frequency(core_id, self.root)


class SystemClock:
    def monotonic(self) -> float:
        return time.monotonic()

    def sleep_until(self, deadline: float) -> None:
        remaining = deadline - time.monotonic()
        if remaining > 0:
            time.sleep(remaining)

    def wall_ms(self) -> int:
        return now_ms()


class ShellTargetRunner:
    """Launches a target with an opaque shell command and stops it with another one.

    The launch command typically blocks for the lifetime of the workload (`docker run ...`), so it is started
    in the background; the kill command runs to completion.
    """

    def __init__(self, startup_grace_s: float = 0.2, kill_timeout_s: float = 30.0) -> None:
        self.startup_grace_s = startup_grace_s
        self.kill_timeout_s = kill_timeout_s
        self._process: Optional[subprocess.Popen] = None

    def launch(self, command: str) -> None:
        try:
            self._process = subprocess.Popen(  # noqa: S602
                command, shell=True, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL
            )
        except OSError as e:
            raise TargetError(f"could not launch {command!r}: {e}") from e
        try:
            returncode = self._process.wait(timeout=self.startup_grace_s)
        except subprocess.TimeoutExpired:
            return
        if returncode != 0:
            raise TargetError(f"launch command {command!r} exited with status {returncode}")

    def kill(self, command: str) -> None:
        if command:
            try:
                subprocess.run(command, shell=True, check=False, timeout=self.kill_timeout_s)  # noqa: S602
            except subprocess.TimeoutExpired:
                logger.warning("Kill command timed out", command=command)
        if self._process is not None and self._process.poll() is None:
            self._process.terminate()
            try:
                self._process.wait(timeout=self.kill_timeout_s)
            except subprocess.TimeoutExpired:
                self._process.kill()
        self._process = None
