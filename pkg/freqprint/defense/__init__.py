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

"""Countermeasures: frequency noise injection and detection of cpufreq polling."""

from freqprint.defense.detector import (
    Detection,
    DetectorConfig,
    SyscallEvent,
    detect,
    parse_event_stream,
    read_detector_config,
)
from freqprint.defense.noise import (
    BurstRecord,
    NoiseConfig,
    NoiseInjector,
    NoiseSchedule,
    augment_dataset,
    augment_with_noise,
    calibrate_repeat_duration,
    run_noise_injector,
)

__all__ = [
    "BurstRecord",
    "Detection",
    "DetectorConfig",
    "NoiseConfig",
    "NoiseInjector",
    "NoiseSchedule",
    "SyscallEvent",
    "augment_dataset",
    "augment_with_noise",
    "calibrate_repeat_duration",
    "detect",
    "parse_event_stream",
    "read_detector_config",
    "run_noise_injector",
]
