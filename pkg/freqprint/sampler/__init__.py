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

"""Frequency sampling of running targets: single measurements and resumable campaigns."""

from freqprint.sampler.campaign import (
    CampaignSpec,
    CampaignTarget,
    estimate_campaign_seconds,
    read_campaign_spec,
    run_campaign,
)
from freqprint.sampler.collection import SamplerConfig, collect_measurement
from freqprint.sampler.sources import (
    ShellTargetRunner,
    SysfsFrequencySource,
    SystemClock,
    discover_cores,
    read_core_frequency,
    read_core_limits,
)

__all__ = [
    "CampaignSpec",
    "CampaignTarget",
    "SamplerConfig",
    "ShellTargetRunner",
    "SysfsFrequencySource",
    "SystemClock",
    "collect_measurement",
    "discover_cores",
    "estimate_campaign_seconds",
    "read_campaign_spec",
    "read_core_frequency",
    "read_core_limits",
    "run_campaign",
]
