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

from datetime import datetime

import pytz


def isoformat(dt: datetime) -> str:
    """ISO format datetime object with max precision limited to milliseconds.

    Args:
        dt: datatime object to be formatted

    Returns:
        ISO 8601 formatted string

    """
    return dt.isoformat(timespec="milliseconds")


def nowtz() -> datetime:
    """Fetch Datetime now object in UTC.

    Returns:
        Datetime object

    """
    return datetime.now(tz=pytz.utc)


def epoch_ms(dt: datetime) -> int:
    """Milliseconds since the unix epoch.

    >>> epoch_ms(datetime(1970, 1, 1, 0, 0, 1, tzinfo=pytz.utc))
    1000

    """
    return int(round(dt.timestamp() * 1000))


def now_ms() -> int:
    return epoch_ms(nowtz())
