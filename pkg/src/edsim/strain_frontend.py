"""Analog strain-trigger chain: bridge, instrument amplifier, RC filter,
digital-pot threshold and comparator.

Strain is passed around in microstrain (ue), voltages in volts, times in
seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .errors import ConfigError, UnreachableThresholdError

POT_TAPS = 256
POT_TOTAL_RESISTANCE = 100_000.0
INA_GAIN_NUMERATOR = 50_000.0

_UE = 1e-6


@dataclass(frozen=True)
class BridgeConfig:
    gauge_factor: float = 2.07
    bridge_resistance: float = 350.0
    excitation_voltage: float = 3.2
    # shunt-calibration override: microstrain per volt of bridge output
    scale_factor: Optional[float] = None

    def __post_init__(self) -> None:
        if self.gauge_factor <= 0 or self.bridge_resistance <= 0 or self.excitation_voltage <= 0:
            raise ConfigError("bridge gauge_factor, bridge_resistance and excitation_voltage must be > 0")
        if self.scale_factor is not None and self.scale_factor <= 0:
            raise ConfigError("bridge scale_factor must be > 0 when given")

    @property
    def excitation_current(self) -> float:
        """Gauge excitation current in mA (V_EXT / 2R)."""
        return self.excitation_voltage / (2 * self.bridge_resistance) * 1e3


@dataclass(frozen=True)
class AmplifierConfig:
    gain_resistor: float = 470.0
    offset_voltage: float = 1.0
    quiescent_current_off: float = 0.450
    quiescent_current_on: float = 1.4

    def __post_init__(self) -> None:
        if self.gain_resistor <= 0:
            raise ConfigError("amplifier gain_resistor must be > 0")
        if self.offset_voltage < 0:
            raise ConfigError("amplifier offset_voltage must be >= 0")

    @property
    def gain(self) -> float:
        return amplifier_gain(self.gain_resistor)


@dataclass
class FilterState:
    resistance: float = 1000.0
    capacitance: float = 10e-6
    output_voltage: float = 0.0

    def __post_init__(self) -> None:
        if self.resistance <= 0 or self.capacitance <= 0:
            raise ConfigError("filter resistance and capacitance must be > 0")

    @property
    def tau(self) -> float:
        return self.resistance * self.capacitance

    @property
    def cutoff_hz(self) -> float:
        return 1.0 / (2 * math.pi * self.tau)


@dataclass(frozen=True)
class ThresholdConfig:
    tap: int = 80
    pot_total_resistance: float = POT_TOTAL_RESISTANCE
    excitation_voltage: float = 3.2

    def __post_init__(self) -> None:
        if not 0 <= self.tap < POT_TAPS:
            raise ConfigError(f"threshold tap must be in [0, {POT_TAPS - 1}], got {self.tap}")
        if self.excitation_voltage <= 0:
            raise ConfigError("threshold excitation_voltage must be > 0")

    @property
    def step_voltage(self) -> float:
        return self.excitation_voltage / POT_TAPS

    @property
    def wiper_resistance(self) -> float:
        return self.tap * self.pot_total_resistance / POT_TAPS

    @property
    def voltage(self) -> float:
        return threshold_voltage(self.tap, self)


@dataclass
class ComparatorState:
    propagation_delay: float = 4.5e-6
    output_level: int = 0
    # (time, level) of a transition that has been caused but not yet fired
    pending_transition: Optional[Tuple[float, int]] = None
    last_transition_time: Optional[float] = None
    # crossing that produced the most recent transition
    last_crossing_time: Optional[float] = None
    _pending_crossing: Optional[float] = field(default=None, repr=False)


def bridge_output(strain: float, cfg: BridgeConfig) -> float:
    """Quarter-bridge differential output voltage for ``strain`` microstrain."""
    if cfg.scale_factor is not None:
        return strain / cfg.scale_factor
    return cfg.gauge_factor * strain * _UE / 4.0 * cfg.excitation_voltage


def strain_from_voltage(delta_v: float, cfg: BridgeConfig) -> float:
    """Inverse of :func:`bridge_output`; returns microstrain."""
    if cfg.scale_factor is not None:
        return delta_v * cfg.scale_factor
    return delta_v * 4.0 / (cfg.gauge_factor * cfg.excitation_voltage) / _UE


def amplifier_gain(gain_resistor: float) -> float:
    if gain_resistor <= 0:
        raise ConfigError(f"gain resistor must be > 0, got {gain_resistor}")
    return 1.0 + INA_GAIN_NUMERATOR / gain_resistor


def amplify(delta_v: float, gain: float, offset: float) -> float:
    return gain * delta_v + offset


def filter_step(state: FilterState, input_voltage: float, dt: float) -> float:
    """Advance the RC low-pass by ``dt`` holding ``input_voltage`` constant.

    Uses the exact exponential update, so it is stable for any ``dt`` and
    exact for piecewise-constant input.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    alpha = -math.expm1(-dt / state.tau)
    state.output_voltage += (input_voltage - state.output_voltage) * alpha
    return state.output_voltage


def threshold_voltage(tap: int, cfg: ThresholdConfig) -> float:
    if not 0 <= tap < POT_TAPS:
        raise ConfigError(f"tap must be in [0, {POT_TAPS - 1}], got {tap}")
    r_dp = tap * cfg.pot_total_resistance / POT_TAPS
    return r_dp / cfg.pot_total_resistance * cfg.excitation_voltage


def min_strain_threshold(gauge_factor: float, gain: float) -> float:
    """Smallest programmable strain-threshold step, in microstrain."""
    if gauge_factor <= 0 or gain <= 0:
        raise ValueError("gauge_factor and gain must be > 0")
    return 4.0 / (POT_TAPS * gauge_factor * gain) / _UE


def strain_at_comparator_voltage(v: float, bridge: BridgeConfig, amp: AmplifierConfig) -> float:
    """Strain whose amplified, offset bridge output equals ``v``."""
    return strain_from_voltage((v - amp.offset_voltage) / amp.gain, bridge)


def tap_for_strain_threshold(
    target_strain: float,
    bridge: BridgeConfig,
    amp: AmplifierConfig,
    thr: ThresholdConfig,
) -> Tuple[int, float]:
    """Pick the pot tap whose threshold is nearest ``target_strain``.

    The comparator sees the offset signal, so the tap encodes
    ``offset + gain * bridge_output(target)``. Rounds to nearest with ties
    up. Returns ``(tap, effective_strain)``.
    """
    if target_strain < 0:
        raise ValueError("target strain must be >= 0")
    v_target = amp.offset_voltage + amp.gain * bridge_output(target_strain, bridge)
    if v_target > thr.excitation_voltage:
        raise UnreachableThresholdError(
            f"{target_strain:g} ue needs {v_target:.4f} V at the comparator, "
            f"above V_EXT = {thr.excitation_voltage:g} V"
        )
    tap = math.floor(v_target * POT_TAPS / thr.excitation_voltage + 0.5)
    tap = min(max(tap, 0), POT_TAPS - 1)
    effective = strain_at_comparator_voltage(threshold_voltage(tap, thr), bridge, amp)
    return tap, effective


def comparator_step(state: ComparatorState, filtered_voltage: float, v_th: float, now: float) -> int:
    """Advance the comparator to ``now`` and return the output level at ``now``.

    A crossing schedules the output change one propagation delay later. An
    opposite crossing before that fires cancels the pending change.
    """
    pending = state.pending_transition
    if pending is not None and pending[0] <= now:
        state.output_level = pending[1]
        state.last_transition_time = pending[0]
        state.last_crossing_time = state._pending_crossing
        state.pending_transition = None
        state._pending_crossing = None

    wanted = 1 if filtered_voltage > v_th else 0
    pending = state.pending_transition
    if pending is not None:
        if wanted != pending[1]:
            # glitch shorter than the propagation delay
            state.pending_transition = None
            state._pending_crossing = None
    elif wanted != state.output_level:
        state.pending_transition = (now + state.propagation_delay, wanted)
        state._pending_crossing = now
    return state.output_level
