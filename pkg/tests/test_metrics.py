import math
import random

import pytest

from isync.cluster import CommRequirement, SyncRequirement, UeProfile
from isync.metrics import (
    ByteCounters,
    MetricsReport,
    comm_satisfied,
    integration_gain,
    percentile,
    sync_satisfied,
)

from oracles import percentile_nearest_rank

UE = UeProfile(0, (0.0, 0.0), SyncRequirement(1000, 20_000_000), CommRequirement(1000.0, 10_000_000))


def test_percentile_matches_oracle():
    rnd = random.Random(4)
    for _ in range(200):
        xs = [rnd.uniform(-5, 5) for _ in range(rnd.randint(1, 50))]
        q = rnd.choice([50, 90, 95, 99, 100])
        assert percentile(xs, q) == percentile_nearest_rank(xs, q)
    assert percentile([1, math.inf], 95) == math.inf
    with pytest.raises(ValueError):
        percentile([], 95)


def test_all_zero_error_satisfied():
    assert sync_satisfied(UE, [(0, 0)] * 10)


def test_one_outlier_in_hundred_tolerated():
    window = [(10, 1000)] * 99 + [(10**6, 1000)]
    assert sync_satisfied(UE, window)
    window = [(10, 1000)] * 94 + [(10**6, 1000)] * 6
    assert not sync_satisfied(UE, window)


def test_timeliness_conjunction():
    assert not sync_satisfied(UE, [(0, 40_000_000)] * 20)
    assert not sync_satisfied(UE, [0] * 20, timeliness_samples=[math.inf] * 20)
    assert not sync_satisfied(UE, [0] * 20, timeliness_samples=[])


def test_comm_satisfaction():
    assert comm_satisfied(UE, [1e6] * 20, 2000, 2000)
    assert not comm_satisfied(UE, [1e6] * 18 + [math.inf] * 2, 1800, 2000)
    assert not comm_satisfied(UE, [1e6] * 20, 1000, 2000)


def test_integration_gain_examples():
    base = MetricsReport(0.5, 0.5, total_overhead_bytes=1000)
    assert integration_gain(base, base) == 0.0
    better = MetricsReport(0.9, 0.9, total_overhead_bytes=500)
    assert integration_gain(better, base) == pytest.approx(0.45)
    zero = MetricsReport(0.5, 0.5, total_overhead_bytes=0)
    assert integration_gain(better, zero) == pytest.approx(0.5 * 0.4)


def test_report_fraction_invariant():
    with pytest.raises(ValueError):
        MetricsReport(sync_satisfaction=1.5)


def test_byte_counters():
    acc = ByteCounters()
    acc.add("control", 10, 2)
    acc.add("user", 106, 6)
    assert (acc.control, acc.user, acc.overhead, acc.messages) == (10, 106, 8, 2)
    with pytest.raises(ValueError):
        acc.add("side", 1, 1)
    rows = [{"plane": "user", "bytes": "5", "overhead_bytes": "5"}]
    assert ByteCounters.from_trace(rows).user == 5
