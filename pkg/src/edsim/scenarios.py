"""Synthetic structural-response traces and the lab/daily test scenarios.

Acceleration is in mg (dynamic only, gravity removed), strain in
microstrain. A :class:`Scenario` is a set of trace segments on a zero
background, so a day-long run does not need a day of samples in memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError
from .timekeeper import parse_clock

DEFAULT_TRACE_RATE = 1000.0
ACCEL = "acceleration_3axis"
STRAIN = "strain"

# z carries the beam response; the other axes see a fraction of it
AXIS_WEIGHTS = (0.25, 0.1, 1.0)


@dataclass
class SignalTrace:
    """Uniformly sampled trace, zero-order hold between samples.

    ``samples`` has shape (n,) for strain and (n, 3) for acceleration.
    """

    kind: str
    sample_rate: float
    samples: np.ndarray
    start: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in (ACCEL, STRAIN):
            raise ConfigError(f"unknown trace kind {self.kind!r}")
        if self.sample_rate <= 0:
            raise ConfigError("trace sample_rate must be > 0")
        self.samples = np.asarray(self.samples, dtype=float)
        want = 2 if self.kind == ACCEL else 1
        if self.samples.ndim != want or (self.kind == ACCEL and self.samples.shape[1] != 3):
            raise ConfigError(f"{self.kind} samples have shape {self.samples.shape}")

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    @property
    def end(self) -> float:
        return self.start + self.duration

    def times(self) -> np.ndarray:
        return self.start + np.arange(len(self)) / self.sample_rate

    def index_at(self, t: float) -> int:
        # the small bias keeps grid-aligned times on their own sample
        return math.floor((t - self.start) * self.sample_rate + 1e-9)

    def value_at(self, t: float):
        i = self.index_at(t)
        if 0 <= i < len(self):
            return self.samples[i]
        return None

    def window(self, t0: float, t1: float) -> np.ndarray:
        """Samples whose hold interval intersects [t0, t1]."""
        i0 = max(self.index_at(t0), 0)
        i1 = min(self.index_at(t1), len(self) - 1)
        if i1 < i0:
            return self.samples[:0]
        return self.samples[i0 : i1 + 1]


@dataclass
class Scenario:
    duration: float
    accel: List[SignalTrace] = field(default_factory=list)
    strain: List[SignalTrace] = field(default_factory=list)
    clock_start: float = 0.0
    seed: Optional[int] = None
    name: str = "custom"

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ConfigError("scenario duration must be > 0")
        for tr in self.accel:
            if tr.kind != ACCEL:
                raise ConfigError("accel list holds a non-acceleration trace")
        for tr in self.strain:
            if tr.kind != STRAIN:
                raise ConfigError("strain list holds a non-strain trace")
        self.accel.sort(key=lambda tr: tr.start)
        self.strain.sort(key=lambda tr: tr.start)

    def traces(self) -> List[SignalTrace]:
        return [*self.accel, *self.strain]

    def accel_at(self, t: float) -> Tuple[float, float, float]:
        total = np.zeros(3)
        for tr in self.accel:
            v = tr.value_at(t)
            if v is not None:
                total += v
        return tuple(float(x) for x in total)

    def strain_at(self, t: float) -> float:
        total = 0.0
        for tr in self.strain:
            v = tr.value_at(t)
            if v is not None:
                total += float(v)
        return total

    def peak_accel(self, t0: float, t1: float) -> float:
        peaks = [np.abs(tr.window(t0, t1)).max(initial=0.0) for tr in self.accel]
        return float(max(peaks, default=0.0))

    def peak_strain(self, t0: float, t1: float) -> float:
        peaks = [tr.window(t0, t1).max(initial=0.0) for tr in self.strain]
        return float(max(peaks, default=0.0))


def _damped_sine(t: np.ndarray, natural_freq: float, damping_ratio: float) -> np.ndarray:
    w = 2 * math.pi * natural_freq
    tt = np.maximum(t, 0.0)
    return np.where(t >= 0, np.exp(-w * damping_ratio * tt) * np.sin(w * tt), 0.0)


def first_peak_time(natural_freq: float, damping_ratio: float) -> float:
    """Time after impact of the first maximum of the damped sine."""
    w = 2 * math.pi * natural_freq
    return math.atan2(1.0, damping_ratio) / w


def first_peak_value(amplitude: float, natural_freq: float, damping_ratio: float) -> float:
    tp = first_peak_time(natural_freq, damping_ratio)
    return float(amplitude * _damped_sine(np.array([tp]), natural_freq, damping_ratio)[0])


def first_crossing_delay(amplitude: float, natural_freq: float, damping_ratio: float, level: float) -> float:
    """Delay after impact at which the response first reaches ``level``."""
    tp = first_peak_time(natural_freq, damping_ratio)
    if first_peak_value(amplitude, natural_freq, damping_ratio) <= level:
        raise ConfigError(f"impact of amplitude {amplitude} never exceeds {level}")

    def f(t: float) -> float:
        return amplitude * _damped_sine(np.array([t]), natural_freq, damping_ratio)[0] - level

    return brentq(f, 0.0, tp, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _check_impact(amplitude, natural_freq, damping_ratio, duration, rate) -> None:
    if amplitude < 0 or natural_freq <= 0 or duration <= 0 or rate <= 0:
        raise ConfigError("impact amplitude must be >= 0; frequency, duration and rate > 0")
    if not 0 < damping_ratio < 1:
        raise ConfigError("damping_ratio must be in (0, 1)")


def gen_impact_response(
    amplitude: float,
    natural_freq: float,
    damping_ratio: float,
    impact_time: float,
    duration: float,
    rate: float = DEFAULT_TRACE_RATE,
    start: float = 0.0,
) -> SignalTrace:
    """Damped-sine beam response to an impact at ``impact_time``.

    The trace covers [start, start + duration). The z axis carries
    ``amplitude``; x and y get fixed fractions of it.
    """
    _check_impact(amplitude, natural_freq, damping_ratio, duration, rate)
    n = int(round(duration * rate))
    t = start + np.arange(n) / rate
    wave = amplitude * _damped_sine(t - impact_time, natural_freq, damping_ratio)
    samples = np.outer(wave, AXIS_WEIGHTS)
    return SignalTrace(ACCEL, rate, samples, start)


def gen_static_ramp(
    rate_of_strain: float,
    start: float,
    duration: float,
    sample_rate: float = DEFAULT_TRACE_RATE,
) -> SignalTrace:
    if rate_of_strain < 0 or start < 0 or duration <= 0 or sample_rate <= 0:
        raise ConfigError("ramp rate and start must be >= 0; duration and sample_rate > 0")
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    return SignalTrace(STRAIN, sample_rate, rate_of_strain * np.maximum(0.0, t - start))


def ramp_rate_for_crossing(level: float, start: float, crossing_time: float) -> float:
    if crossing_time <= start:
        raise ConfigError("crossing must come after the ramp start")
    return level / (crossing_time - start)


def impact_scenario(
    threshold: float = 80.0,
    crossing_time: float = 9.5,
    amplitude: float = 300.0,
    natural_freq: float = 8.0,
    damping_ratio: float = 0.02,
    duration: float = 135.0,
    rate: float = DEFAULT_TRACE_RATE,
) -> Scenario:
    """Cantilever impact whose first rise crosses ``threshold`` at ``crossing_time``."""
    delay = first_crossing_delay(amplitude, natural_freq, damping_ratio, threshold)
    impact_time = crossing_time - delay
    # past this point the response is below the burst floor; zero background takes over
    decay = math.log(amplitude / _BURST_FLOOR) / (2 * math.pi * natural_freq * damping_ratio)
    span = min(duration, impact_time + decay + 1.0)
    trace = gen_impact_response(amplitude, natural_freq, damping_ratio, impact_time, span, rate)
    return Scenario(duration, accel=[trace], name="impact")


def strain_ramp_scenario(
    threshold_strain: float,
    crossing_time: float = 8.132,
    ramp_start: float = 2.0,
    duration: float = 135.0,
    rate: float = DEFAULT_TRACE_RATE,
) -> Scenario:
    """Static ramp whose raw strain reaches ``threshold_strain`` at ``crossing_time``."""
    slope = ramp_rate_for_crossing(threshold_strain, ramp_start, crossing_time)
    trace = gen_static_ramp(slope, ramp_start, duration, rate)
    return Scenario(duration, strain=[trace], name="strain_ramp")


def quiet_scenario(duration: float = 86400.0, clock_start: float = 0.0) -> Scenario:
    return Scenario(duration, clock_start=clock_start, name="quiet")


# daily-test layout
DAILY_ALARMS = ("07:05", "19:05")
DAILY_VIBRATION_EVENTS = 13
DAILY_STRAIN_EVENTS = 5
# the one event the daily test reports in detail
PINNED_VIBRATION = (3680.0, 509.5, 248.5)  # 01:01:20, mg, ue
_EVENT_GUARD = 300.0
_BURST_FLOOR = 1.0  # mg; bursts are cut once the envelope drops below this


def _impact_burst(rng, t0: float, peak: float, rate: float) -> Tuple[SignalTrace, float, float]:
    f = float(rng.uniform(5.0, 12.0))
    zeta = float(rng.uniform(0.02, 0.05))
    length = min(math.log(peak / _BURST_FLOOR) / (2 * math.pi * f * zeta) + 0.5, 15.0)
    trace = gen_impact_response(1.0, f, zeta, t0, length, rate, start=t0)
    trace.samples *= peak / np.abs(trace.samples).max()
    return trace, f, zeta


def _strain_pulse(t_start: float, rise: float, hold: float, release: float, peak: float, rate: float) -> SignalTrace:
    n = int(round((rise + hold + release) * rate))
    t = np.arange(n) / rate
    up = peak * t / rise
    down = peak * (1.0 - (t - rise - hold) / release)
    wave = np.where(t < rise, up, np.where(t < rise + hold, peak, down))
    return SignalTrace(STRAIN, rate, np.clip(wave, 0.0, None), t_start)


def gen_daily_scenario(
    seed: int = 0,
    accel_thr: float = 200.0,
    strain_thr: float = 264.0,
    clock_start: float = 0.0,
    drv_interval: float = 3600.0,
    drv_on_time: float = 60.0,
    drv_first_rise: Optional[float] = None,
    alarm_clocks: Sequence[str] = DAILY_ALARMS,
    rate: float = DEFAULT_TRACE_RATE,
) -> Scenario:
    """One day of random impacts and static strain pulses.

    Strain pulses are placed inside strain-power windows so the comparator
    is energised when they cross. Every event is kept ``_EVENT_GUARD``
    seconds clear of every other event and alarm, which exceeds the
    platform's startup plus sensing time. Impacts also stay clear of the
    strain-power windows.
    """
    if accel_thr <= 0 or strain_thr <= 0:
        raise ConfigError("thresholds must be > 0")
    day = 86400.0
    rng = np.random.default_rng(seed)
    first_rise = drv_interval if drv_first_rise is None else drv_first_rise
    windows = [first_rise + k * drv_interval for k in range(int((day - first_rise) // drv_interval) + 1)]
    windows = [w for w in windows if w + drv_on_time < day]

    taken: List[float] = [(parse_clock(c) - clock_start) % day for c in alarm_clocks]
    pinned_t, pinned_accel, pinned_strain = PINNED_VIBRATION
    pinned_t = (pinned_t - clock_start) % day
    taken.append(pinned_t)

    def clear(t: float) -> bool:
        return all(abs(t - u) > _EVENT_GUARD for u in taken)

    strain_traces: List[SignalTrace] = []
    candidates = [w for w in windows if clear(w)]
    picks = rng.choice(len(candidates), size=DAILY_STRAIN_EVENTS, replace=False)
    for idx in sorted(int(i) for i in picks):
        w = candidates[idx]
        t_start = w + float(rng.uniform(3.0, 8.0))
        rise = float(rng.uniform(10.0, 20.0))
        peak = strain_thr * float(rng.uniform(1.6, 2.4))
        strain_traces.append(_strain_pulse(t_start, rise, 15.0, 5.0, peak, rate))
        taken.append(w)

    def away_from_windows(t: float) -> bool:
        return all(t < w - _EVENT_GUARD or t > w + drv_on_time + _EVENT_GUARD for w in windows)

    accel_traces: List[SignalTrace] = []
    strain_companions: List[SignalTrace] = []
    burst, f, zeta = _impact_burst(rng, pinned_t, pinned_accel, rate)
    accel_traces.append(burst)
    companion = gen_impact_response(1.0, f, zeta, pinned_t, burst.duration, rate, start=pinned_t)
    wave = companion.samples[:, 2]
    strain_companions.append(SignalTrace(STRAIN, rate, wave * pinned_strain / np.abs(wave).max(), pinned_t))

    while len(accel_traces) < DAILY_VIBRATION_EVENTS:
        t0 = round(float(rng.uniform(60.0, day - 600.0)), 3)
        if not (clear(t0) and away_from_windows(t0)):
            continue
        peak = accel_thr * float(rng.uniform(1.3, 3.0))
        burst, _, _ = _impact_burst(rng, t0, peak, rate)
        accel_traces.append(burst)
        taken.append(t0)

    return Scenario(
        day,
        accel=accel_traces,
        strain=strain_traces + strain_companions,
        clock_start=clock_start,
        seed=seed,
        name="daily",
    )
