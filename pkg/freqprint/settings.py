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

from pathlib import Path

from pydantic import BaseSettings, Field

# Flags drive behaviour; the environment only controls verbosity.
SYSFS_CPU_ROOT = Path("/sys/devices/system/cpu")
MANIFEST_NAME = "manifest.tsv"
TEMPLATES_NAME = "templates.txt"
FAILURES_NAME = "failures.log"


class AppSettings(BaseSettings):
    LOG_LEVEL: str = Field("WARNING", env="FREQPRINT_LOG")
    SERVICE_NAME: str = "freqprint"


app_settings = AppSettings()
