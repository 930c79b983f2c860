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

"""Randomized floating point noise on a sibling core, live and simulated.

The live injector alternates bursts of floating point work with idle periods so the frequency of the core it
runs on jumps to high levels at random moments. `augment_with_noise` overlays the same schedule on a recorded
trace, which is how the defense is evaluated without hardware.
"""
import math
import os
import time
from threading import Event, Thread
from typing import Callable, Iterable, Iterator, List, Optional, Tuple

import numpy as np
import structlog
from pydantic import validator

from freqprint.traces.models import FreqprintBaseModel, FrequencyTrace, LabeledTrace, TraceDataset
from freqprint.types import FloatArray, Split
from freqprint.utils.errors import FreqprintError, InvalidArgumentError, ParseError, PlatformError
from freqprint.utils.files import PathLike, atomic_write_text
from freqprint.utils.keyvalue import parse_float, parse_int, split_key_value
from freqprint.utils.rng import Seed, make_rng

logger = structlog.get_logger(__name__)

KERNEL_LANES = 4096
KERNEL_DECAY = 0.999999


class NoiseConfig(FreqprintBaseModel):
    core_id: int = 0
    n_repeat_range: Tuple[int, int] = (5, 30)
    t_sleep_range_ms: Tuple[int, int] = (50, 300)
    kernel_iterations: int = 20_000_000
    duration_s: float = 60.0
    # Wall time of one N_repeat unit, used by the simulation.
    repeat_duration_ms: float = 10.0

    @validator("core_id")
    def _non_negative_core(cls, v: int) -> int:
        if v < 0:
            raise ValueError("core_id must not be negative")
        return v

    @validator("n_repeat_range", "t_sleep_range_ms")
    def _ordered_range(cls, v: Tuple[int, int]) -> Tuple[int, int]:
        lo, hi = v
        if lo < 0 or lo > hi:
            raise ValueError(f"range must satisfy 0 <= lo <= hi, got {v}")
        return v

    @validator("kernel_iterations")
    def _at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("kernel_iterations must be at least 1")
        return v

    @validator("duration_s", "repeat_duration_ms")
    def _positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("must be positive")
        return v


class BurstRecord(FreqprintBaseModel):
    burst_start_ms: float
    n_repeat: int
    t_sleep_ms: int


class NoiseSchedule(Iterator[Tuple[int, int]]):
    """Endless sequence of (n_repeat, t_sleep_ms) draws; depends only on the seed and the two ranges."""

    def __init__(self, cfg: NoiseConfig, seed: Seed = 0) -> None:
        self.cfg = cfg
        self.rng = make_rng(seed)

    def draw(self) -> Tuple[int, int]:
        n_repeat = int(self.rng.integers(self.cfg.n_repeat_range[0], self.cfg.n_repeat_range[1] + 1))
        t_sleep = int(self.rng.integers(self.cfg.t_sleep_range_ms[0], self.cfg.t_sleep_range_ms[1] + 1))
        return n_repeat, t_sleep

    def __next__(self) -> Tuple[int, int]:
        return self.draw()


def new_kernel_state() -> FloatArray:
    state = np.ones((3, KERNEL_LANES))
    state[1] = KERNEL_DECAY
    return state


def fp_kernel(iterations: int, state: FloatArray) -> float:
    """Dependent add/multiply chain over the accumulators in `state`, roughly `iterations` operations.

    Every step reads the previous result, so no step can be skipped. The return value is meant to be kept.
    """
    a, b, c = state
    for _ in range(max(1, iterations // (2 * KERNEL_LANES))):
        np.add(a, b, out=c)
        np.multiply(c, b, out=a)
    return float(a[0])


def calibrate_repeat_duration(kernel_iterations: int = 20_000_000, units: int = 5) -> float:
    """Measured wall time of one N_repeat unit on this host, in milliseconds."""
    state = new_kernel_state()
    fp_kernel(kernel_iterations, state)
    start = time.perf_counter()
    for _ in range(units):
        fp_kernel(kernel_iterations, state)
    elapsed_ms = (time.perf_counter() - start) * 1000 / units
    logger.info("Calibrated noise kernel", kernel_iterations=kernel_iterations, repeat_duration_ms=elapsed_ms)
    return elapsed_ms


def pin_to_core(core_id: int) -> None:
    """Pin the calling thread to one core."""
    if not hasattr(os, "sched_setaffinity"):
        raise PlatformError("CPU affinity is not supported on this platform")
    allowed = os.sched_getaffinity(0)
    if core_id >= (os.cpu_count() or 0):
        raise InvalidArgumentError(f"core {core_id} does not exist")
    if core_id not in allowed:
        raise PlatformError(f"core {core_id} is not in the allowed set {sorted(allowed)}")
    try:
        os.sched_setaffinity(0, {core_id})
    except OSError as e:
        raise PlatformError(f"could not pin to core {core_id}: {e}") from e


class NoiseInjector(Thread):
    """Runs bursts of `fp_kernel` pinned to `cfg.core_id` until stopped or `cfg.duration_s` has passed."""

    def __init__(
        self,
        cfg: NoiseConfig,
        seed: Seed = 0,
        stop: Optional[Event] = None,
        clock: Callable[[], float] = time.monotonic,
    ) -> None:
        super().__init__(name=f"NoiseInjector-core{cfg.core_id}", daemon=True)
        self.cfg = cfg
        self.schedule = NoiseSchedule(cfg, seed)
        self.stop_event = stop or Event()
        self.clock = clock
        self.log: List[BurstRecord] = []
        self.error: Optional[Exception] = None
        self.sink = 0.0

    def stop(self) -> None:
        self.stop_event.set()

    def run(self) -> None:
        try:
            pin_to_core(self.cfg.core_id)
            self._inject()
        except Exception as e:
            if not isinstance(e, FreqprintError):
                logger.exception("Noise injector crashed", core_id=self.cfg.core_id)
            self.error = e

    def _inject(self) -> None:
        state = new_kernel_state()
        start = self.clock()
        deadline = start + self.cfg.duration_s
        logger.info("Noise injector started", core_id=self.cfg.core_id, duration_s=self.cfg.duration_s)
        if self.cfg.n_repeat_range[1] == 0:
            # Nothing to burst.
            self.stop_event.wait(max(deadline - self.clock(), 0.0))
            logger.info("Noise injector stopped", bursts=0)
            return
        while not self.stop_event.is_set() and (now := self.clock()) < deadline:
            n_repeat, t_sleep = self.schedule.draw()
            self.log.append(BurstRecord(burst_start_ms=(now - start) * 1000, n_repeat=n_repeat, t_sleep_ms=t_sleep))
            for _ in range(n_repeat):
                if self.stop_event.is_set():
                    break
                self.sink += fp_kernel(self.cfg.kernel_iterations, state)
            remaining = deadline - self.clock()
            if remaining > 0:
                self.stop_event.wait(min(t_sleep / 1000, remaining))
        logger.info("Noise injector stopped", bursts=len(self.log))


def run_noise_injector(cfg: NoiseConfig, stop: Optional[Event] = None, seed: Seed = 0) -> List[BurstRecord]:
    """Run the injector in a thread until `stop` is set or the duration passed; returns the burst log.

    Raises:
        FreqprintError: the injector thread failed; errors that are not freqprint errors are wrapped.

    """
    injector = NoiseInjector(cfg, seed=seed, stop=stop)
    injector.start()
    try:
        while injector.is_alive():
            injector.join(timeout=0.5)
    except KeyboardInterrupt:
        injector.stop()
        injector.join()
    error = injector.error
    if isinstance(error, FreqprintError):
        raise error
    if error is not None:
        raise FreqprintError(f"noise injector failed: {error}", details={"cause": type(error).__name__}) from error
    return injector.log


def simulate_bursts(cfg: NoiseConfig, duration_ms: float, seed: Seed = 0) -> List[BurstRecord]:
    """The burst timeline the injector would produce with ideal timing over `duration_ms`."""
    if cfg.n_repeat_range[1] == 0:
        return []
    schedule = NoiseSchedule(cfg, seed)
    records: List[BurstRecord] = []
    t = 0.0
    while t < duration_ms:
        n_repeat, t_sleep = schedule.draw()
        records.append(BurstRecord(burst_start_ms=t, n_repeat=n_repeat, t_sleep_ms=t_sleep))
        t += n_repeat * cfg.repeat_duration_ms + t_sleep
    return records


def augment_with_noise(trace: FrequencyTrace, cfg: NoiseConfig, max_khz: int, seed: Seed = 0) -> FrequencyTrace:
    """Raise every sample taken during a simulated burst to `max_khz`; samples are never lowered.

    Sample k is taken at k * interval_ms; a burst covers [start, start + n_repeat * repeat_duration_ms).
    """
    if max_khz < max(trace.samples):
        raise InvalidArgumentError(f"max_khz {max_khz} is below the trace maximum {max(trace.samples)}")
    bursts = simulate_bursts(cfg, trace.duration_ms, seed)
    if not bursts:
        return trace
    values = trace.array()
    for burst in bursts:
        end_ms = burst.burst_start_ms + burst.n_repeat * cfg.repeat_duration_ms
        first = math.ceil(burst.burst_start_ms / trace.interval_ms)
        stop = min(math.ceil(end_ms / trace.interval_ms), len(values))
        if first < stop:
            values[first:stop] = np.maximum(values[first:stop], max_khz)
    return trace.with_samples(values)


def augment_dataset(
    ds: TraceDataset, cfg: NoiseConfig, max_khz: int, seed: int = 0, splits: Optional[Iterable[Split]] = (Split.TEST,)
) -> TraceDataset:
    """Noisy copy of `ds`: items of the given splits (all items when `splits` is None) get their own schedule."""
    selected = None if splits is None else set(splits)
    items = [
        LabeledTrace(trace=augment_with_noise(item.trace, cfg, max_khz, seed=(seed, index)), label=item.label)
        if selected is None or tag in selected
        else item
        for index, (item, tag) in enumerate(zip(ds.items, ds.split_assignment))
    ]
    logger.info("Augmented dataset with noise", items=len(items), splits=sorted(selected) if selected else "all")
    return TraceDataset(classes=ds.classes, items=tuple(items), split_assignment=ds.split_assignment)


def burst_coverage(trace: FrequencyTrace, noisy: FrequencyTrace) -> float:
    """Fraction of samples changed by the noise overlay."""
    return float(np.mean(trace.array() != noisy.array()))


def format_burst_log(records: Iterable[BurstRecord]) -> str:
    """One record per line.

    >>> print(format_burst_log([BurstRecord(burst_start_ms=0.0, n_repeat=5, t_sleep_ms=100)]), end="")
    burst_start_ms=0.000 n_repeat=5 t_sleep_ms=100

    """
    return "".join(
        f"burst_start_ms={r.burst_start_ms:.3f} n_repeat={r.n_repeat} t_sleep_ms={r.t_sleep_ms}\n" for r in records
    )


def parse_burst_log(text: str) -> List[BurstRecord]:
    records = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        fields = dict(split_key_value(part, line_no) for part in raw.split())
        try:
            records.append(
                BurstRecord(
                    burst_start_ms=parse_float(fields["burst_start_ms"], "burst_start_ms", line_no),
                    n_repeat=parse_int(fields["n_repeat"], "n_repeat", line_no),
                    t_sleep_ms=parse_int(fields["t_sleep_ms"], "t_sleep_ms", line_no),
                )
            )
        except KeyError as e:
            raise ParseError(f"missing field {e.args[0]}", line=line_no) from None
    return records


def write_burst_log(records: Iterable[BurstRecord], path: PathLike) -> None:
    atomic_write_text(path, format_burst_log(records))
