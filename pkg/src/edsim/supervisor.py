"""Trigger aggregation, local MCU wake logic, platform latch lifecycle and
event classification/logging."""

from __future__ import annotations

import csv
import enum
import io
import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

from .accel_trigger import FifoEntry
from .errors import ConfigError, OutputError

EVENT_CSV_HEADER = ("detect_time_s", "sense_start_s", "class", "peak_accel_mg", "peak_strain_ue")


class EventClass(str, enum.Enum):
    VIBRATION = "vibration"
    STRAIN = "strain"
    TIMER = "timer"


class McuMode(str, enum.Enum):
    POWER_DOWN = "power_down"
    ACTIVE = "active"


class PlatformPhase(str, enum.Enum):
    OFF = "off"
    STARTING = "starting"
    SENSING = "sensing"


@dataclass(frozen=True)
class TriggerLines:
    vibration: int = 0
    strain: int = 0
    timer: int = 0

    def __or__(self, other: "TriggerLines") -> "TriggerLines":
        return TriggerLines(
            self.vibration | other.vibration,
            self.strain | other.strain,
            self.timer | other.timer,
        )


@dataclass(frozen=True)
class SupervisorConfig:
    hold_time: float = 0.030
    mcu_clock_hz: float = 1e6
    wake_cycles: int = 2
    gate_delay: float = 5.5e-9
    startup_latency: float = 0.95
    sensing_duration: float = 120.0

    def __post_init__(self) -> None:
        if self.hold_time <= 0 or self.mcu_clock_hz <= 0 or self.wake_cycles < 0:
            raise ConfigError("supervisor hold_time, mcu_clock_hz must be > 0 and wake_cycles >= 0")
        if self.gate_delay < 0 or self.startup_latency < 0 or self.sensing_duration <= 0:
            raise ConfigError("supervisor latencies must be >= 0 and sensing_duration > 0")

    @property
    def wake_latency(self) -> float:
        return self.wake_cycles / self.mcu_clock_hz


@dataclass
class McuState:
    hold_time: float = 0.030
    wake_latency: float = 2e-6
    mode: McuMode = McuMode.POWER_DOWN
    active_since: Optional[float] = None
    hold_until: Optional[float] = None
    last_or: int = 0
    wake_count: int = 0

    @property
    def wake_line(self) -> int:
        return 1 if self.mode is McuMode.ACTIVE else 0


@dataclass
class PlatformState:
    startup_latency: float = 0.95
    sensing_duration: float = 120.0
    phase: PlatformPhase = PlatformPhase.OFF
    phase_until: Optional[float] = None
    latched: bool = False
    latched_at: Optional[float] = None
    sense_start: Optional[float] = None
    sense_end: Optional[float] = None
    cycles: int = 0
    releases: int = 0
    # survive a same-call relatch, unlike sense_start/sense_end
    last_sense_start: Optional[float] = None
    last_release: Optional[float] = None


@dataclass
class EventRecord:
    detect_time: float
    sense_start_time: Optional[float]
    event_class: EventClass
    peak_accel: float
    peak_strain: float
    pre_event_samples: List[FifoEntry] = field(default_factory=list, repr=False)

    def csv_row(self) -> List[str]:
        sense = "" if self.sense_start_time is None else f"{self.sense_start_time:.6f}"
        return [
            f"{self.detect_time:.6f}",
            sense,
            self.event_class.value,
            f"{self.peak_accel:.3f}",
            f"{self.peak_strain:.3f}",
        ]


def or_aggregate(lines: TriggerLines) -> int:
    return 1 if (lines.vibration or lines.strain or lines.timer) else 0


def mcu_step(state: McuState, or_line: int, now: float) -> int:
    """Pin-change wake: a rising OR edge wakes the MCU, which holds the wake
    line high for ``hold_time``. Rising edges while active extend the hold.

    Returns the wake line level at ``now``.
    """
    rising = or_line and not state.last_or
    state.last_or = 1 if or_line else 0

    if state.mode is McuMode.ACTIVE and now >= state.hold_until:
        state.mode = McuMode.POWER_DOWN
        state.active_since = None
    if rising:
        if state.mode is McuMode.POWER_DOWN:
            state.mode = McuMode.ACTIVE
            state.active_since = now + state.wake_latency
            state.hold_until = state.active_since + state.hold_time
            state.wake_count += 1
        else:
            state.hold_until = max(state.hold_until, now + state.hold_time)
    if state.mode is McuMode.ACTIVE and now < state.active_since:
        # still inside the interrupt wake-up cycles
        return 0
    return state.wake_line


def platform_step(state: PlatformState, wake_line: int, now: float) -> PlatformPhase:
    """Latch on wake, boot for ``startup_latency``, sense, then release."""
    if state.phase is PlatformPhase.STARTING and now >= state.phase_until:
        state.phase = PlatformPhase.SENSING
        state.sense_start = state.last_sense_start = now
        state.phase_until = now + state.sensing_duration
    if state.phase is PlatformPhase.SENSING and now >= state.phase_until:
        state.phase = PlatformPhase.OFF
        state.sense_end = state.last_release = now
        state.phase_until = None
        state.latched = False
        state.releases += 1
    if state.phase is PlatformPhase.OFF and wake_line:
        state.phase = PlatformPhase.STARTING
        state.latched = True
        state.latched_at = now
        state.sense_start = None
        state.sense_end = None
        state.phase_until = now + state.startup_latency
        state.cycles += 1
    return state.phase


def classify_event(
    peak_accel: float,
    peak_strain: float,
    accel_thr: float,
    strain_thr: float,
    lines: TriggerLines,
) -> EventClass:
    """Vibration beats strain beats timer."""
    if accel_thr <= 0 or strain_thr <= 0:
        raise ValueError("classification thresholds must be > 0")
    if lines.vibration or peak_accel > accel_thr:
        return EventClass.VIBRATION
    if lines.strain or peak_strain > strain_thr:
        return EventClass.STRAIN
    return EventClass.TIMER


class EventLog:
    """Append-only event log, optionally mirrored to a CSV file."""

    def __init__(self, path: Union[str, os.PathLike, None] = None):
        self.records: List[EventRecord] = []
        self.path = path
        if path is not None:
            try:
                with open(path, "w", newline="") as fh:
                    csv.writer(fh, lineterminator="\n").writerow(EVENT_CSV_HEADER)
            except OSError as exc:
                raise OutputError(f"cannot create event log {path}: {exc}") from exc

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def append(self, record: EventRecord) -> None:
        if self.records and record.detect_time < self.records[-1].detect_time:
            raise ValueError("event log must stay in detection order")
        self.records.append(record)
        if self.path is not None:
            try:
                with open(self.path, "a", newline="") as fh:
                    csv.writer(fh, lineterminator="\n").writerow(record.csv_row())
            except OSError as exc:
                raise OutputError(f"cannot append to event log {self.path}: {exc}") from exc

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(EVENT_CSV_HEADER)
        for rec in self.records:
            writer.writerow(rec.csv_row())
        return buf.getvalue()


def log_event(record: EventRecord, log: EventLog) -> None:
    log.append(record)


def count_by_class(records: Sequence[EventRecord]) -> dict:
    counts = {c.value: 0 for c in EventClass}
    for rec in records:
        counts[rec.event_class.value] += 1
    return counts
