from datetime import datetime, timedelta

import pytz

from freqprint.utils.datetime import epoch_ms, isoformat, now_ms, nowtz


def test_isoformat_limits_precision_to_milliseconds():
    dt = datetime(2023, 11, 14, 22, 13, 20, 123456, tzinfo=pytz.utc)
    assert isoformat(dt) == "2023-11-14T22:13:20.123+00:00"


def test_epoch_ms():
    assert epoch_ms(datetime(2023, 11, 14, 22, 13, 20, tzinfo=pytz.utc)) == 1_700_000_000_000
    amsterdam = pytz.timezone("Europe/Amsterdam").localize(datetime(2023, 11, 14, 23, 13, 20))
    assert epoch_ms(amsterdam) == 1_700_000_000_000


def test_now_is_utc_and_current():
    now = nowtz()
    assert now.tzinfo is pytz.utc
    assert abs(now_ms() - epoch_ms(now)) < timedelta(minutes=1).total_seconds() * 1000
