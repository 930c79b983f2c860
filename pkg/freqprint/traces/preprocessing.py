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

"""Trace preprocessing: smoothing, moving maximum, normalization, truncation and the activity metric."""

from typing import Iterable, List

import numpy as np
from scipy.ndimage import correlate1d, maximum_filter1d

from freqprint.traces.models import ActivityConfig, FrequencyTrace
from freqprint.types import FloatArray
from freqprint.utils.errors import InvalidArgumentError

DEFAULT_FILTER_WINDOW = 10


def gaussian_kernel(window: int) -> FloatArray:
    """Discrete, unit-sum Gaussian with sigma = window / 4 sampled at integer offsets -window//2 .. window//2.

    Odd windows give exactly `window` taps. Even windows get one extra tap so the kernel stays centered and
    symmetric.

    >>> gaussian_kernel(1)
    array([1.])
    >>> k = gaussian_kernel(3)
    >>> bool(abs(k.sum() - 1.0) < 1e-12), bool(k[0] == k[2])
    (True, True)

    """
    if window < 1:
        raise InvalidArgumentError(f"window must be at least 1, got {window}")
    radius = window // 2
    sigma = window / 4
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-(offsets**2) / (2 * sigma**2))
    return weights / weights.sum()


def gaussian_smooth(trace: FrequencyTrace, window: int) -> FrequencyTrace:
    """Gaussian filter over a centered window; edge windows are clamped and the kernel re-normalized."""
    if window < 1 or window > len(trace):
        raise InvalidArgumentError(f"window must be in [1, {len(trace)}], got {window}")
    kernel = gaussian_kernel(window)
    values = trace.array().astype(np.float64)
    numerator = correlate1d(values, kernel, mode="constant", cval=0.0)
    # Sum of the kernel weights that fall inside the trace at every position.
    denominator = correlate1d(np.ones_like(values), kernel, mode="constant", cval=0.0)
    return trace.with_samples(np.rint(numerator / denominator))


def moving_max(trace: FrequencyTrace, window: int) -> FrequencyTrace:
    """Maximum over a centered window of `window` samples, clamped at the edges.

    Even windows reach one sample further back than forward.
    """
    if window < 1:
        raise InvalidArgumentError(f"window must be at least 1, got {window}")
    # Extending with the edge value leaves every clamped window maximum unchanged.
    return trace.with_samples(maximum_filter1d(trace.array(), size=window, mode="nearest"))


def normalize(trace: FrequencyTrace, f_min: float, f_max: float) -> FloatArray:
    """Map samples linearly onto [0, 1] using the given bounds, clipping values outside them."""
    if f_max <= f_min:
        raise InvalidArgumentError(f"f_max must exceed f_min, got f_min={f_min} f_max={f_max}")
    scaled = (trace.array().astype(np.float64) - f_min) / (f_max - f_min)
    return np.clip(scaled, 0.0, 1.0)


def truncate(trace: FrequencyTrace, n: int) -> FrequencyTrace:
    if n < 1 or n > len(trace):
        raise InvalidArgumentError(f"n must be in [1, {len(trace)}], got {n}")
    if n == len(trace):
        return trace
    return trace.with_samples(trace.samples[:n])


def frequency_activity(trace: FrequencyTrace, cfg: ActivityConfig = ActivityConfig()) -> int:
    """Number of samples strictly above the activity threshold."""
    return int(np.count_nonzero(trace.array() > cfg.threshold_khz))


def preprocess_multicore(traces: Iterable[FrequencyTrace], window: int = DEFAULT_FILTER_WINDOW) -> List[FrequencyTrace]:
    """Gaussian filter followed by a moving max with the same window, applied to every core independently.

    Each returned trace is meant to be used as a separate measurement of the same workload.
    """
    return [moving_max(gaussian_smooth(trace, window), window) for trace in traces]
