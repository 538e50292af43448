"""Fixed-step simulation of the complete wake-up system.

Each step runs, in order: trace sampling, strain chain, accelerometer,
RTC/nanotimer, supervisor, power accounting. Latencies shorter than a step
(comparator, OR gate, MCU wake) are carried as exact sub-step offsets on
event timestamps.

Stretches where nothing can change (no signal, no pending timer, filter
settled on the safe side of the threshold) are advanced in closed form.
That gives the same result as stepping through them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .accel_trigger import AccelFifo, activity_detect, fifo_peak, ingest_sample
from .config import SimConfig
from .errors import ConfigError
from .power_ledger import MODULES, PowerLedger, integrate
from .scenarios import Scenario
from .strain_frontend import ComparatorState, FilterState, amplify, bridge_output, comparator_step, filter_step
from .supervisor import (
    EventLog,
    EventRecord,
    McuMode,
    McuState,
    PlatformPhase,
    PlatformState,
    TriggerLines,
    classify_event,
    count_by_class,
    log_event,
    mcu_step,
    or_aggregate,
    platform_step,
)
from .timekeeper import NanotimerState, RtcState, format_clock, nanotimer_step, rtc_step

log = logging.getLogger(__name__)

_EPS = 1e-9
# power-state key: (strain circuit powered, mcu busy, rtc busy)
PowerKey = Tuple[bool, bool, bool]


@dataclass
class PowerTrace:
    """Piecewise-constant current trace; row i holds from times[i] to times[i+1]."""

    modules: Tuple[str, ...]
    times: List[float] = field(default_factory=list)
    currents: List[Tuple[float, ...]] = field(default_factory=list)
    end_time: float = 0.0

    def totals(self) -> List[float]:
        return [sum(row) for row in self.currents]

    def integral_mah(self) -> float:
        edges = self.times[1:] + [self.end_time]
        return sum(sum(row) * (b - a) for row, a, b in zip(self.currents, self.times, edges)) / 3600.0


@dataclass
class SimResult:
    events: EventLog
    power_trace: PowerTrace
    ledger: PowerLedger
    summary: Dict


@dataclass
class _Cycle:
    detect_time: float
    lines: TriggerLines
    sense_start: Optional[float] = None
    pre_event: list = field(default_factory=list)


class _Segments:
    """Cursor over time-sorted trace segments of one kind."""

    def __init__(self, traces):
        self.traces = list(traces)
        self._first = 0

    def active(self, t: float):
        while self._first < len(self.traces) and self.traces[self._first].end <= t:
            self._first += 1
        out = []
        for tr in self.traces[self._first :]:
            if tr.start > t + _EPS:
                break
            if tr.end > t:
                out.append(tr)
        return out

    def next_start(self, t: float) -> float:
        for tr in self.traces[self._first :]:
            if tr.end > t:
                return tr.start if tr.start > t else t
        return math.inf


class Simulator:
    def __init__(self, scenario: Scenario, config: SimConfig, event_log: Optional[EventLog] = None):
        self.scenario = scenario
        self.config = config
        eds = config.eds
        self.dt = dt = config.sim.step
        self._validate()

        self.gain = eds.amplifier.gain
        self.threshold, self.strain_threshold = eds.resolve_threshold()
        self.v_th = self.threshold.voltage

        self.n_steps = int(math.floor(scenario.duration / dt + _EPS))
        self.accel_div = int(round(1.0 / (eds.accel.sample_rate * dt)))

        self.filter = FilterState(eds.filter.resistance, eds.filter.capacitance, 0.0)
        self.comparator = ComparatorState()
        self.fifo = AccelFifo()
        self.rtc = RtcState(eds.rtc, scenario.clock_start)
        self.nano = NanotimerState(eds.nanotimer)
        sup = eds.supervisor
        self.mcu = McuState(hold_time=sup.hold_time, wake_latency=sup.wake_latency)
        self.platform = PlatformState(startup_latency=sup.startup_latency, sensing_duration=sup.sensing_duration)

        self.accel_segs = _Segments(scenario.accel)
        self.strain_segs = _Segments(scenario.strain)

        self.vib_line = 0
        self.timer_line = 0
        self.timer_until = -math.inf
        self.timer_rise = None
        self.prev_lines = TriggerLines()
        self.prev_or = 0

        self.cycle: Optional[_Cycle] = None
        self.events = event_log if event_log is not None else EventLog()

        # power accounting
        self.table = eds.power.table()
        self._currents_cache: Dict[PowerKey, Tuple[float, ...]] = {}
        self.key_time: Dict[PowerKey, float] = {}
        self.windows: Dict[str, List[Tuple[float, float]]] = {"active": [], "mcu": [], "rtc": []}
        self.trace = PowerTrace(MODULES)
        self._last_key: Optional[PowerKey] = None
        self.wake_count = 0
        self.ledger = PowerLedger()

    def _validate(self) -> None:
        eds, dt = self.config.eds, self.dt
        for tr in self.scenario.traces():
            if dt > 1.0 / tr.sample_rate + 1e-12:
                raise ConfigError(f"step {dt} s is coarser than a {tr.sample_rate} Hz trace")
        ratio = 1.0 / (eds.accel.sample_rate * dt)
        if abs(ratio - round(ratio)) > 1e-6 or round(ratio) < 1:
            raise ConfigError(f"accelerometer period must be a whole number of {dt} s steps")
        if eds.supervisor.hold_time < dt:
            log.warning("hold time %.3g s is shorter than the step %.3g s", eds.supervisor.hold_time, dt)

    # power

    def _currents(self, key: PowerKey) -> Tuple[float, ...]:
        cached = self._currents_cache.get(key)
        if cached is None:
            strain_on, mcu_busy, rtc_busy = key
            vals = []
            for name in MODULES:
                row = self.table[name]
                if row.strain_switched:
                    on = strain_on
                elif name == "mcu":
                    on = mcu_busy
                elif name == "rtc":
                    on = rtc_busy
                else:
                    on = False
                vals.append(row.active if on else row.inactive)
            cached = self._currents_cache[key] = tuple(vals)
        return cached

    @staticmethod
    def _open(windows: List[Tuple[float, float]], t: float) -> bool:
        return any(a <= t < b for a, b in windows)

    def _account(self, t0: float, t1: float) -> None:
        """Charge the interval [t0, t1), splitting at any activity-window edge."""
        drv = bool(self.nano.drv)
        for name in self.windows:
            self.windows[name] = [w for w in self.windows[name] if w[1] > t0]
        cuts = {t0, t1}
        for wins in self.windows.values():
            for a, b in wins:
                if t0 < a < t1:
                    cuts.add(a)
                if t0 < b < t1:
                    cuts.add(b)
        points = sorted(cuts)
        for a, b in zip(points, points[1:]):
            key = (
                drv or self._open(self.windows["active"], a),
                self._open(self.windows["mcu"], a),
                self._open(self.windows["rtc"], a),
            )
            self.key_time[key] = self.key_time.get(key, 0.0) + (b - a)
            if key != self._last_key:
                self.trace.times.append(a)
                self.trace.currents.append(self._currents(key))
                self._last_key = key

    # stepping

    def _strain_powered(self) -> bool:
        return bool(self.nano.drv) or self.mcu.mode is McuMode.ACTIVE

    def _strain_input(self, t: float) -> float:
        if not self._strain_powered():
            return 0.0
        strain = 0.0
        for tr in self.strain_segs.active(t):
            v = tr.value_at(t)
            if v is not None:
                strain += float(v)
        delta_v = bridge_output(strain, self.config.eds.bridge)
        return amplify(delta_v, self.gain, self.config.eds.amplifier.offset_voltage)

    def _accel_sample(self, t: float) -> Tuple[float, float, float]:
        ax = ay = az = 0.0
        for tr in self.accel_segs.active(t):
            v = tr.value_at(t)
            if v is not None:
                ax += float(v[0])
                ay += float(v[1])
                az += float(v[2])
        return ax, ay, az

    def step(self, k: int) -> None:
        t = k * self.dt
        eds = self.config.eds

        # strain chain: compare the filter state at t, then advance it
        vin = self._strain_input(t)
        strain_line = comparator_step(self.comparator, self.filter.output_voltage, self.v_th, t)
        filter_step(self.filter, vin, self.dt)

        # accelerometer
        if k % self.accel_div == 0:
            sample = self._accel_sample(t)
            ingest_sample(self.fifo, t, *sample)
            self.vib_line = activity_detect(sample, eds.accel)

        # timekeeper
        alarms = rtc_step(self.rtc, t)
        for a in alarms.alarm1_times:
            self.timer_until = a + eds.rtc.activity_time
            self.timer_rise = a
        for a in alarms.alarm1_times + alarms.alarm2_times:
            self.windows["rtc"].append((a, a + eds.rtc.activity_time))
        self.timer_line = 1 if t < self.timer_until else 0
        nanotimer_step(self.nano, t, alarms.alarm2_fired)

        self._supervise(t, TriggerLines(self.vib_line, strain_line, self.timer_line))
        self._account(t, t + self.dt)

    def _edge(self, lines: TriggerLines, t: float) -> Tuple[float, float]:
        """(line edge time, physical detection time) of the earliest rising line."""
        prev = self.prev_lines
        cands = []
        if lines.vibration and not prev.vibration:
            cands.append((t, t))
        if lines.strain and not prev.strain:
            cands.append((self.comparator.last_transition_time, self.comparator.last_crossing_time))
        if lines.timer and not prev.timer:
            cands.append((self.timer_rise, self.timer_rise))
        return min(cands)

    def _supervise(self, t: float, lines: TriggerLines) -> None:
        sup = self.config.eds.supervisor
        or_line = or_aggregate(lines)
        if or_line and not self.prev_or:
            edge, detect = self._edge(lines, t)
            woke_before = self.mcu.wake_count
            mcu_step(self.mcu, 1, edge + sup.gate_delay)
            if self.mcu.wake_count != woke_before:
                self._on_wake(detect, lines)
        mcu_step(self.mcu, or_line, t)

        if self.cycle is not None and self.mcu.mode is McuMode.ACTIVE:
            self.cycle.lines = self.cycle.lines | lines

        if self.mcu.mode is McuMode.ACTIVE:
            wins = self.windows["active"]
            if wins and wins[-1][0] == self.mcu.active_since:
                wins[-1] = (wins[-1][0], self.mcu.hold_until)

        # a wake line still held after a release relatches with detection at t
        self._platform(self.mcu.wake_line, t, t, lines)

        self.prev_lines = lines
        self.prev_or = or_line

    def _on_wake(self, detect: float, lines: TriggerLines) -> None:
        mcu, eds = self.mcu, self.config.eds
        wake = mcu.active_since
        self.wake_count += 1
        self.windows["active"].append((wake, mcu.hold_until))
        self.windows["mcu"].append((wake, wake + self.table["mcu"].activity_time))
        self.windows["rtc"].append((wake, wake + eds.rtc.activity_time))
        logic = self.table["digital_logic"]
        self.ledger.add_charge("digital_logic", (logic.active - logic.inactive) * logic.activity_time / 3600.0)
        self._platform(1, wake, detect, lines)

    def _platform(self, wake_line: int, now: float, detect: float, lines: TriggerLines) -> None:
        p = self.platform
        before, cycles, releases = p.phase, p.cycles, p.releases
        phase = platform_step(p, wake_line, now)
        if before is PlatformPhase.STARTING and (phase is not PlatformPhase.STARTING or p.cycles != cycles):
            self.cycle.sense_start = p.last_sense_start
            self.cycle.pre_event = self.fifo.snapshot()
        if p.releases != releases:
            self._finish_cycle(p.last_release)
        if p.cycles != cycles:
            self.cycle = _Cycle(detect_time=detect, lines=lines)

    def _finish_cycle(self, t_end: float) -> None:
        cyc, sc, eds = self.cycle, self.scenario, self.config.eds
        self.cycle = None
        if cyc.sense_start is not None:
            # pre-event window is whatever the FIFO still held at sense start
            pre_start = cyc.pre_event[0][0] if cyc.pre_event else cyc.sense_start
            peak_a = max(fifo_peak(cyc.pre_event), sc.peak_accel(cyc.sense_start, t_end))
            peak_s = sc.peak_strain(pre_start, t_end)
        else:
            peak_a = fifo_peak(self.fifo.snapshot())
            peak_s = 0.0
        cls = classify_event(peak_a, peak_s, eds.accel.threshold, self.strain_threshold, cyc.lines)
        rec = EventRecord(cyc.detect_time, cyc.sense_start, cls, peak_a, peak_s, cyc.pre_event)
        log_event(rec, self.events)

    # fast-forward

    def _quiet_until(self, k: int) -> int:
        """Largest m such that steps k..m-1 are provably inert; k if none."""
        t = k * self.dt
        if self.vib_line or self.timer_line or self.prev_or or self.mcu.mode is McuMode.ACTIVE:
            return k
        if self.comparator.pending_transition is not None:
            return k
        if any(b > t for wins in self.windows.values() for _, b in wins):
            return k
        vin = self.config.eds.amplifier.offset_voltage if self._strain_powered() else 0.0
        out = self.filter.output_voltage
        if self.comparator.output_level:
            if not (out > self.v_th and vin > self.v_th):
                return k
        elif out > self.v_th or vin > self.v_th:
            return k
        horizon = min(
            self.accel_segs.next_start(t),
            # an unpowered bridge ignores strain until the power state changes
            self.strain_segs.next_start(t) if self._strain_powered() else math.inf,
            self.nano.next_change(),
            self.rtc.next_alarm() if self.rtc.next_alarm() is not None else math.inf,
            self.platform.phase_until if self.platform.phase is not PlatformPhase.OFF else math.inf,
        )
        if horizon <= t:
            return k
        m = math.ceil((horizon - _EPS) / self.dt) if math.isfinite(horizon) else self.n_steps
        return min(m, self.n_steps)

    def _skip(self, k: int, m: int) -> None:
        """Advance inert steps k..m-1 in one go."""
        dt = self.dt
        vin = self.config.eds.amplifier.offset_voltage if self._strain_powered() else 0.0
        span = (m - k) * dt
        f = self.filter
        f.output_voltage = vin + (f.output_voltage - vin) * math.exp(-span / f.tau)
        # zero accel samples; only the newest ones can survive in the FIFO
        first = -(-k // self.accel_div) * self.accel_div
        keep = -(-self.fifo.capacity // 3) + 1
        instants = range(first, m, self.accel_div)
        for j in instants[-keep:]:
            ingest_sample(self.fifo, j * dt, 0.0, 0.0, 0.0)
        self._account(k * dt, m * dt)

    def run(self) -> SimResult:
        k = 0
        while k < self.n_steps:
            m = self._quiet_until(k)
            if m - k >= 2:
                self._skip(k, m)
                k = m
            else:
                self.step(k)
                k += 1
        end = self.n_steps * self.dt
        if self.cycle is not None:
            self._finish_cycle(end)
        return self._result(end)

    def _result(self, end: float) -> SimResult:
        self.trace.end_time = end
        for key in sorted(self.key_time):
            integrate(self.ledger, dict(zip(MODULES, self._currents(key))), self.key_time[key])
        records = self.events.records
        latencies = [r.sense_start_time - r.detect_time for r in records if r.sense_start_time is not None]
        strain_on = sum(v for key, v in self.key_time.items() if key[0])
        summary = {
            "scenario": self.scenario.name,
            "seed": self.scenario.seed,
            "duration_s": end,
            "step_s": self.dt,
            "counts": count_by_class(records),
            "total_events": len(records),
            "events": [
                {
                    "detect_time_s": r.detect_time,
                    "detect_clock": format_clock(self.scenario.clock_start + r.detect_time),
                    "sense_start_s": r.sense_start_time,
                    "class": r.event_class.value,
                    "peak_accel_mg": r.peak_accel,
                    "peak_strain_ue": r.peak_strain,
                }
                for r in records
            ],
            "latencies_s": latencies,
            "wake_count": self.wake_count,
            "platform_cycles": self.platform.cycles,
            "strain_threshold": {
                "tap": self.threshold.tap,
                "v_th": self.v_th,
                "effective_strain_ue": self.strain_threshold,
            },
            "strain_power_on_s": strain_on,
            "charge_mAh": self.ledger.total,
            "module_charge_mAh": dict(self.ledger.charge),
            "avg_mA": self.ledger.total * 3600.0 / end if end > 0 else 0.0,
        }
        return SimResult(self.events, self.trace, self.ledger, summary)


def run_simulation(scenario: Scenario, config: SimConfig, event_log: Optional[EventLog] = None) -> SimResult:
    """Run ``scenario`` under ``config``; outputs depend only on the two."""
    return Simulator(scenario, config, event_log).run()
