"""UE virtual clocks and the six-timestamp offset/skew estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

MAX_SKEW_PPM = 1000.0
PPM = 1e-6


@dataclass
class ClockState:
    """Affine UE clock with an optional random-walk noise term.

    ``local(t) = t + offset_ns + skew_ppm*1e-6*(t - last_correction_time) + w(t)``
    where ``w`` is a Wiener process of intensity ``rw_sigma`` ns/sqrt(s),
    reset to zero at every correction. ``w`` is advanced in place by
    :func:`read_local`, so reads must come in non-decreasing time order.
    """

    offset_ns: float = 0.0
    skew_ppm: float = 0.0
    rw_sigma: float = 0.0
    last_correction_time: int = 0
    max_skew_ppm: float = MAX_SKEW_PPM
    rw_value: float = 0.0
    rw_time: int = 0

    def __post_init__(self):
        if abs(self.skew_ppm) > self.max_skew_ppm:
            raise ValueError(f"|skew| {self.skew_ppm} ppm exceeds bound {self.max_skew_ppm} ppm")
        if self.rw_sigma < 0:
            raise ValueError("rw_sigma must be non-negative")
        self.rw_time = max(self.rw_time, self.last_correction_time)


def _advance_noise(clock: ClockState, t_true: int, rng: Optional[np.random.Generator]) -> float:
    if clock.rw_sigma > 0 and t_true > clock.rw_time:
        if rng is None:
            raise ValueError("a noisy clock needs an rng to be read")
        dt_s = (t_true - clock.rw_time) * 1e-9
        clock.rw_value += float(rng.normal(0.0, clock.rw_sigma * math.sqrt(dt_s)))
        clock.rw_time = t_true
    return clock.rw_value


def clock_error(clock: ClockState, t_true: int, rng: Optional[np.random.Generator] = None) -> float:
    """Local minus reference time at ``t_true`` (ns, unrounded)."""
    if t_true < clock.last_correction_time:
        raise ValueError("cannot read a clock before its last correction")
    noise = _advance_noise(clock, t_true, rng)
    return clock.offset_ns + clock.skew_ppm * PPM * (t_true - clock.last_correction_time) + noise


def read_local(clock: ClockState, t_true: int, rng: Optional[np.random.Generator] = None) -> int:
    """Integer-nanosecond local timestamp taken at reference time ``t_true``."""
    return int(round(t_true + clock_error(clock, t_true, rng)))


@dataclass
class SyncSession:
    t1: Optional[int] = None
    t2: Optional[int] = None
    t3: Optional[int] = None
    t4: Optional[int] = None
    t5: Optional[int] = None
    t6: Optional[int] = None
    phy_timestamping: bool = True
    session_id: int = 0
    ue_id: int = 0

    def timestamps(self):
        return (self.t1, self.t2, self.t3, self.t4, self.t5, self.t6)


@dataclass(frozen=True)
class SyncEstimate:
    # offset_hat is the UE clock error at the instant the UE captured ref_local
    offset_hat: float = 0.0
    skew_hat: float = 0.0
    valid: bool = False
    ref_local: float = 0.0


INVALID = SyncEstimate()


def estimate_offset_skew(session: SyncSession) -> SyncEstimate:
    """Recover clock offset and skew from T1..T6.

    Skew comes from the two downlink pairs (T1, T2) and (T5, T6); the
    uplink pair is de-skewed before the usual two-way offset formula.
    """
    ts = session.timestamps()
    if any(t is None for t in ts):
        return INVALID
    t1, t2, t3, t4, t5, t6 = ts
    base = t5 - t1
    if base == 0:
        return INVALID
    rate_err = ((t6 - t2) - base) / base
    if rate_err <= -1.0:
        return INVALID
    t3_ref = t2 + (t3 - t2) / (1.0 + rate_err)
    offset = ((t2 - t1) - (t4 - t3_ref)) / 2.0
    return SyncEstimate(offset_hat=offset, skew_hat=rate_err / PPM, valid=True, ref_local=float(t2))


def estimate_offset_two_way(t1, t2, t3, t4) -> SyncEstimate:
    """Offset-only estimate from a four-timestamp exchange; skew is left at zero."""
    if None in (t1, t2, t3, t4):
        return INVALID
    offset = ((t2 - t1) - (t4 - t3)) / 2.0
    return SyncEstimate(offset_hat=offset, skew_hat=0.0, valid=True, ref_local=(t2 + t3) / 2.0)


def apply_correction(clock: ClockState, est: SyncEstimate, t_now: int,
                     rng: Optional[np.random.Generator] = None) -> ClockState:
    """Step and re-rate the clock using ``est``; returns the corrected clock.

    The UE extrapolates the estimated error from ``est.ref_local`` to its
    current local time, subtracts it, and scales its rate by
    ``1/(1 + skew_hat)``. Accumulated noise is folded into the new offset.
    """
    if not est.valid:
        return clock
    err_now = clock_error(clock, t_now, rng)
    local_now = t_now + err_now
    a_hat = est.skew_hat * PPM
    est_err_now = est.offset_hat + a_hat * (local_now - est.ref_local) / (1.0 + a_hat)
    new_skew = ((1.0 + clock.skew_ppm * PPM) / (1.0 + a_hat) - 1.0) / PPM
    if abs(new_skew) > clock.max_skew_ppm:
        # implausible rate estimate: step only
        new_skew = clock.skew_ppm
    return replace(
        clock,
        offset_ns=err_now - est_err_now,
        skew_ppm=new_skew,
        last_correction_time=t_now,
        rw_value=0.0,
        rw_time=t_now,
    )
