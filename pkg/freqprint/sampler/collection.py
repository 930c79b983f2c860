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

"""Collection of one measurement: launch the target, sample every configured core, kill the target."""

from threading import Barrier, Event, Thread
from typing import Dict, List, Optional, Tuple

import structlog
from pydantic import validator

from freqprint.sampler.sources import (
    Clock,
    FrequencySource,
    ShellTargetRunner,
    SysfsFrequencySource,
    SystemClock,
    TargetRunner,
)
from freqprint.traces.models import FreqprintBaseModel, FrequencyTrace
from freqprint.utils.errors import PartialMeasurementError

logger = structlog.get_logger(__name__)


class SamplerConfig(FreqprintBaseModel):
    interval_ms: int = 10
    num_samples: int = 4000
    inter_measurement_sleep_s: float = 5.0
    cores: Tuple[int, ...] = (0,)

    @validator("interval_ms")
    def _interval_at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("interval_ms must be at least 1")
        return v

    @validator("num_samples")
    def _samples_at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("num_samples must be at least 1")
        return v

    @validator("inter_measurement_sleep_s")
    def _non_negative_sleep(cls, v: float) -> float:
        if v < 0:
            raise ValueError("inter_measurement_sleep_s must not be negative")
        return v

    @validator("cores")
    def _unique_cores(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if not v:
            raise ValueError("at least one core must be configured")
        if len(set(v)) != len(v):
            raise ValueError("cores must not contain duplicates")
        return v

    @property
    def measurement_seconds(self) -> float:
        return self.num_samples * self.interval_ms / 1000


class _CoreSampler(Thread):
    """Samples one core on an absolute deadline grid shared with the other core samplers."""

    def __init__(
        self,
        core_id: int,
        cfg: SamplerConfig,
        source: FrequencySource,
        clock: Clock,
        barrier: Barrier,
        grid: Dict[str, float],
        abort: Event,
    ) -> None:
        super().__init__(name=f"CoreSampler-{core_id}", daemon=True)
        self.core_id = core_id
        self.cfg = cfg
        self.source = source
        self.clock = clock
        self.barrier = barrier
        self.grid = grid
        self.abort = abort
        self.samples: List[int] = []
        self.error: Optional[Exception] = None

    def run(self) -> None:
        try:
            self.barrier.wait()
            start = self.grid["start"]
            step = self.cfg.interval_ms / 1000
            for k in range(self.cfg.num_samples):
                if self.abort.is_set():
                    return
                # Deadlines are absolute so read latency never accumulates into drift.
                self.clock.sleep_until(start + k * step)
                self.samples.append(self.source.read(self.core_id))
        except Exception as e:
            self.error = e
            self.abort.set()


def collect_measurement(
    cfg: SamplerConfig,
    launch: str,
    kill: str,
    source: Optional[FrequencySource] = None,
    clock: Optional[Clock] = None,
    runner: Optional[TargetRunner] = None,
    meta: Optional[Dict[str, str]] = None,
) -> List[FrequencyTrace]:
    """Run one measurement and return one trace per configured core, in `cfg.cores` order.

    Raises:
        TargetError: the target could not be launched.
        PartialMeasurementError: a read failed halfway; the samples read so far are attached.

    """
    source = source or SysfsFrequencySource()
    clock = clock or SystemClock()
    runner = runner or ShellTargetRunner()

    grid: Dict[str, float] = {}
    abort = Event()

    def _release() -> None:
        grid["start"] = clock.monotonic()
        grid["wall"] = clock.wall_ms()

    barrier = Barrier(len(cfg.cores), action=_release)
    samplers = [_CoreSampler(core, cfg, source, clock, barrier, grid, abort) for core in cfg.cores]

    runner.launch(launch)
    logger.debug("Launched target", command=launch, cores=list(cfg.cores))
    try:
        for sampler in samplers:
            sampler.start()
        for sampler in samplers:
            sampler.join()
    finally:
        runner.kill(kill)
        logger.debug("Killed target", command=kill)

    failed = [s for s in samplers if s.error is not None]
    if failed:
        first = failed[0].error
        partial = {s.core_id: list(s.samples) for s in samplers}
        message = f"reading core {failed[0].core_id} failed after {len(failed[0].samples)} samples: {first}"
        logger.warning("Measurement aborted", core_id=failed[0].core_id, error=str(first))
        raise PartialMeasurementError(message, partial, details={"cause": type(first).__name__}) from first

    start_time = int(grid["wall"])
    return [
        FrequencyTrace(
            samples=sampler.samples,
            interval_ms=cfg.interval_ms,
            core_id=sampler.core_id,
            start_time=start_time,
            meta=dict(meta or {}),
        )
        for sampler in samplers
    ]
