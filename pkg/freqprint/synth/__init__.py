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

"""Synthetic fingerprints for desk-scale experiments."""

from freqprint.synth.generator import SynthConfig, generate
from freqprint.synth.templates import (
    PrefixSegment,
    SignatureTemplate,
    default_template_bank,
    read_templates,
    write_templates,
)

__all__ = [
    "PrefixSegment",
    "SignatureTemplate",
    "SynthConfig",
    "default_template_bank",
    "generate",
    "read_templates",
    "write_templates",
]
