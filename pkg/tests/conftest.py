from datetime import date, timedelta

import numpy as np
import pytest

from proxycast.series import TimeSeries


def daily_dates(n, start=date(2015, 1, 1)):
    return tuple(start + timedelta(days=i) for i in range(n))


@pytest.fixture
def ramp_series():
    """Ten fully observed days, values 1..10."""
    return TimeSeries("ramp", daily_dates(10), np.arange(1.0, 11.0))
