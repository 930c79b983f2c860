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

"""Seeded numpy generators for any integer seed."""

from typing import List, Optional, Sequence, Union

import numpy as np

Seed = Union[int, Sequence[int]]

SEED_MASK = 0xFFFF_FFFF_FFFF_FFFF


def seed_entropy(seed: Seed) -> Union[int, List[int]]:
    """Map a seed, or a sequence of seeds, onto the non-negative entropy numpy accepts.

    Negative seeds wrap around as 64 bit two's complement.

    >>> seed_entropy(-1)
    18446744073709551615
    >>> seed_entropy((7, -2, 3))
    [7, 18446744073709551614, 3]

    """
    if isinstance(seed, (int, np.integer)):
        return int(seed) & SEED_MASK
    return [int(part) & SEED_MASK for part in seed]


def make_rng(seed: Optional[Seed] = None) -> np.random.Generator:
    """Generator for `seed`; an unseeded one when `seed` is None."""
    if seed is None:
        return np.random.default_rng()
    return np.random.default_rng(seed_entropy(seed))
