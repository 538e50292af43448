"""RTC dual alarms and the nanotimer that duty-cycles strain power.

Times are simulation seconds. Wall-clock alarm times are "HH:MM" (or
"HH:MM:SS") strings mapped onto simulation time through the clock reading
at simulation start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .errors import ConfigError

DAY = 86400.0
NANOTIMER_ANCHOR_OHMS = 125_000.0
NANOTIMER_ANCHOR_SECONDS = 3600.0

# scheduled instants within this distance of `now` count as reached
_EPS = 1e-9


def parse_clock(text: str) -> float:
    """'07:05' -> seconds after midnight."""
    parts = text.strip().split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"bad time of day {text!r}, expected HH:MM[:SS]")
    try:
        h, m = int(parts[0]), int(parts[1])
        s = float(parts[2]) if len(parts) == 3 else 0.0
    except ValueError as exc:
        raise ConfigError(f"bad time of day {text!r}") from exc
    if not (0 <= h < 24 and 0 <= m < 60 and 0 <= s < 60):
        raise ConfigError(f"time of day out of range: {text!r}")
    return h * 3600.0 + m * 60.0 + s


def format_clock(seconds: float) -> str:
    seconds = seconds % DAY
    h, rem = divmod(int(round(seconds)), 3600)
    m, s = divmod(rem, 60)
    return f"{h % 24:02d}:{m:02d}:{s:02d}"


@dataclass(frozen=True)
class RtcConfig:
    alarm1_times: Tuple[str, ...] = ()
    alarm1_interval: Optional[float] = None
    # first periodic firing; None means one interval after start
    alarm1_offset: Optional[float] = None
    alarm2_interval: Optional[float] = None
    alarm2_offset: Optional[float] = None
    supply_current_idle: float = 250e-6  # mA
    activity_current: float = 0.250  # mA
    activity_time: float = 0.020  # s per alarm/event

    def __post_init__(self) -> None:
        object.__setattr__(self, "alarm1_times", tuple(self.alarm1_times))
        clocks = [parse_clock(t) for t in self.alarm1_times]
        if any(b <= a for a, b in zip(clocks, clocks[1:])):
            raise ConfigError("alarm1_times must be strictly increasing within the day")
        for name in ("alarm1_interval", "alarm2_interval"):
            val = getattr(self, name)
            if val is not None and val <= 0:
                raise ConfigError(f"rtc {name} must be > 0")
        if self.alarm1_times and self.alarm1_interval is not None:
            raise ConfigError("set either alarm1_times or alarm1_interval, not both")

    @property
    def alarm1_clock_seconds(self) -> List[float]:
        return [parse_clock(t) for t in self.alarm1_times]


def nanotimer_interval(external_resistance: float) -> float:
    """Pulse interval for the timing resistor, linear through 125 kOhm -> 1 h."""
    if external_resistance <= 0:
        raise ConfigError(f"nanotimer resistance must be > 0, got {external_resistance}")
    return external_resistance / NANOTIMER_ANCHOR_OHMS * NANOTIMER_ANCHOR_SECONDS


@dataclass(frozen=True)
class NanotimerConfig:
    external_resistance: float = 125_000.0
    on_time: float = 60.0
    interval_override: Optional[float] = None
    # time of the first DRV rise; None means one interval after start
    first_rise: Optional[float] = None
    supply_current: float = 35e-6  # mA

    def __post_init__(self) -> None:
        if self.external_resistance <= 0:
            raise ConfigError("nanotimer external_resistance must be > 0")
        if self.interval_override is not None and self.interval_override <= 0:
            raise ConfigError("nanotimer interval_override must be > 0")
        if not 0 < self.on_time < self.interval:
            raise ConfigError(f"nanotimer on_time must be in (0, {self.interval}), got {self.on_time}")

    @property
    def interval(self) -> float:
        if self.interval_override is not None:
            return self.interval_override
        return nanotimer_interval(self.external_resistance)


class _Schedule:
    """Lazy enumerator of alarm instants in simulation time."""

    def __init__(self, clocks: Sequence[float], interval: Optional[float], offset: Optional[float], clock_start: float):
        self.clocks = sorted(clocks)
        self.interval = interval
        self.offset = interval if offset is None else offset
        self.clock_start = clock_start
        self._day = 0
        self._idx = 0
        self._k = 0
        self._skip_before(0.0)

    def _skip_before(self, t0: float) -> None:
        while (t := self.peek()) is not None and t < t0 - _EPS:
            self.pop()

    def peek(self) -> Optional[float]:
        if self.interval is not None:
            return self.offset + self._k * self.interval
        if not self.clocks:
            return None
        return self._day * DAY + self.clocks[self._idx] - self.clock_start

    def pop(self) -> float:
        t = self.peek()
        if self.interval is not None:
            self._k += 1
        else:
            self._idx += 1
            if self._idx == len(self.clocks):
                self._idx = 0
                self._day += 1
        return t


@dataclass
class RtcOutput:
    alarm1_times: List[float] = field(default_factory=list)
    alarm2_times: List[float] = field(default_factory=list)

    @property
    def alarm1_fired(self) -> int:
        return 1 if self.alarm1_times else 0

    @property
    def alarm2_fired(self) -> int:
        return 1 if self.alarm2_times else 0


class RtcState:
    def __init__(self, cfg: RtcConfig, clock_start: float = 0.0):
        self.cfg = cfg
        self.clock_start = clock_start
        self._a1 = _Schedule(cfg.alarm1_clock_seconds, cfg.alarm1_interval, cfg.alarm1_offset, clock_start)
        self._a2 = _Schedule((), cfg.alarm2_interval, cfg.alarm2_offset, clock_start)
        self.now = float("-inf")

    def next_alarm(self) -> Optional[float]:
        times = [t for t in (self._a1.peek(), self._a2.peek()) if t is not None]
        return min(times) if times else None


def rtc_step(state: RtcState, now: float) -> RtcOutput:
    """Fire every alarm instant reached by ``now`` that has not fired yet."""
    if now < state.now:
        raise ValueError("rtc_step time went backwards")
    state.now = now
    out = RtcOutput()
    for sched, sink in ((state._a1, out.alarm1_times), (state._a2, out.alarm2_times)):
        while (t := sched.peek()) is not None and t <= now + _EPS:
            sink.append(sched.pop())
    return out


class NanotimerState:
    def __init__(self, cfg: NanotimerConfig):
        self.cfg = cfg
        self.drv = 0
        self.rise_time: Optional[float] = None
        self.fall_time: Optional[float] = None
        first = cfg.first_rise if cfg.first_rise is not None else cfg.interval
        self.next_rise = first
        self.now = float("-inf")

    def next_change(self) -> float:
        if self.drv:
            return self.rise_time + self.cfg.on_time
        return self.next_rise


def nanotimer_step(state: NanotimerState, now: float, done_pulse: int = 0) -> int:
    """DRV rises every interval and falls at rise + on_time or on DONE, whichever is first."""
    if now < state.now:
        raise ValueError("nanotimer_step time went backwards")
    state.now = now
    cfg = state.cfg
    if state.drv:
        cap = state.rise_time + cfg.on_time
        if now >= cap - _EPS:
            state.drv = 0
            state.fall_time = cap
        elif done_pulse:
            state.drv = 0
            state.fall_time = now
    if not state.drv and now >= state.next_rise - _EPS:
        state.drv = 1
        state.rise_time = state.next_rise
        # catch up if `now` jumped past several boundaries
        skipped = max(0, math.floor((now - state.next_rise + _EPS) / cfg.interval))
        state.next_rise += (skipped + 1) * cfg.interval
        if skipped:
            state.rise_time += skipped * cfg.interval
        if now >= state.rise_time + cfg.on_time - _EPS:
            state.drv = 0
            state.fall_time = state.rise_time + cfg.on_time
    return state.drv
