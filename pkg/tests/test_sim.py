import random

import pytest

from isync.sim import ChannelModel, Direction, EventQueue, SchedulingError, make_rng, schedule, transmit


def test_same_time_pops_in_insertion_order():
    q = EventQueue()
    schedule(q, 0, 1, "a")
    schedule(q, 0, 2, "b")
    assert [q.pop().payload for _ in range(2)] == ["a", "b"]


def test_min_order():
    q = EventQueue()
    schedule(q, 5, 0, "late")
    schedule(q, 3, 0, "early")
    assert q.pop().time == 3
    assert q.pop().time == 5


def test_scheduling_in_the_past_rejected():
    q = EventQueue()
    schedule(q, 10, 0, None)
    q.pop()
    with pytest.raises(SchedulingError):
        schedule(q, 9, 0, None)


def _trace(seed):
    rnd = random.Random(seed)
    q = EventQueue()
    for i in range(100_000):
        q.schedule(rnd.randrange(0, 1_000_000), rnd.randrange(50), i)
    return [(e.time, e.node, e.payload) for e in q.drain()]


def test_random_schedule_trace_is_reproducible():
    a = _trace(7)
    b = _trace(7)
    assert a == b
    assert all(x[0] <= y[0] for x, y in zip(a, a[1:]))


def test_constant_channel():
    ch = ChannelModel(dl_delay_base=5000, ul_delay_base=5000)
    rng = make_rng(1)
    assert transmit(ch, Direction.DL, 10, rng) == 5000
    assert transmit(ch, Direction.UL, 10, rng) == 5000


def test_full_loss():
    ch = ChannelModel(loss_prob=1.0)
    rng = make_rng(1)
    assert all(transmit(ch, Direction.DL, 10, rng) is None for _ in range(100))


def test_loss_fraction_monte_carlo():
    ch = ChannelModel(loss_prob=0.1)
    rng = make_rng(3)
    n = 100_000
    lost = sum(transmit(ch, Direction.UL, 20, rng) is None for _ in range(n))
    assert abs(lost / n - 0.1) <= 0.01


def test_delays_strictly_positive_with_jitter_and_asymmetry():
    ch = ChannelModel(dl_delay_base=10, ul_delay_base=10, jitter=("normal", 0.0, 50.0), asymmetry=3, ns_per_byte=0.5)
    rng = make_rng(4)
    for _ in range(2000):
        assert transmit(ch, Direction.DL, 4, rng) > 0
        assert transmit(ch, Direction.UL, 4, rng) > 0


def test_symmetric_channel_without_jitter():
    ch = ChannelModel(dl_delay_base=7000, ul_delay_base=7000)
    rng = make_rng(5)
    assert transmit(ch, Direction.DL, 100, rng) == transmit(ch, Direction.UL, 100, rng)


def test_serialization_adds_per_byte_time():
    ch = ChannelModel(dl_delay_base=1000, ns_per_byte=8.0)
    assert transmit(ch, Direction.DL, 10, make_rng(0)) == 1080


def test_transmit_deterministic_under_seed():
    ch = ChannelModel(jitter=("uniform", 0, 100), loss_prob=0.3)
    a = [transmit(ch, Direction.DL, 8, make_rng(9, 1)) for _ in range(1)]
    r1, r2 = make_rng(9, 1), make_rng(9, 1)
    assert [transmit(ch, Direction.DL, 8, r1) for _ in range(500)] == [transmit(ch, Direction.DL, 8, r2) for _ in range(500)]
    assert a


def test_bad_channel_parameters():
    with pytest.raises(ValueError):
        ChannelModel(loss_prob=1.5)
    with pytest.raises(ValueError):
        ChannelModel(jitter=("cauchy", 1))
    with pytest.raises(ValueError):
        transmit(ChannelModel(), Direction.DL, 0, make_rng(0))
