"""Device and run configuration, plus the JSON config-file loader.

Every section and field is optional; unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from .accel_trigger import AccelTriggerConfig
from .errors import ConfigError
from .power_ledger import ModuleCurrentTable, ServiceLifeParams
from .strain_frontend import (
    POT_TOTAL_RESISTANCE,
    AmplifierConfig,
    BridgeConfig,
    ThresholdConfig,
    tap_for_strain_threshold,
    strain_at_comparator_voltage,
)
from .supervisor import SupervisorConfig
from .timekeeper import NanotimerConfig, RtcConfig, parse_clock

SCENARIOS = ("daily", "impact", "strain_ramp", "quiet")


@dataclass(frozen=True)
class FilterConfig:
    resistance: float = 1000.0
    capacitance: float = 10e-6

    def __post_init__(self) -> None:
        if self.resistance <= 0 or self.capacitance <= 0:
            raise ConfigError("filter resistance and capacitance must be > 0")

    @property
    def tau(self) -> float:
        return self.resistance * self.capacitance


@dataclass(frozen=True)
class ThresholdSettings:
    """Either a raw pot ``tap`` or a target ``strain_ue`` to quantize."""

    tap: Optional[int] = None
    strain_ue: Optional[float] = 1160.0
    pot_total_resistance: float = POT_TOTAL_RESISTANCE

    def __post_init__(self) -> None:
        if self.tap is None and self.strain_ue is None:
            raise ConfigError("threshold needs either tap or strain_ue")


@dataclass(frozen=True)
class PowerSettings:
    modules: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    capacity: float = 10_000.0
    event_probability: float = 0.01
    idle_current: float = 0.856
    sensing_current: float = 177.86
    derating: float = 0.8

    def table(self) -> ModuleCurrentTable:
        return ModuleCurrentTable().with_overrides(self.modules)

    def service_life_params(self) -> ServiceLifeParams:
        return ServiceLifeParams(
            capacity=self.capacity,
            event_probability=self.event_probability,
            idle_current=self.idle_current,
            sensing_current=self.sensing_current,
            derating=self.derating,
        )


@dataclass(frozen=True)
class SimSettings:
    step: float = 0.001
    scenario: str = "daily"
    seed: int = 0
    duration: Optional[float] = None
    clock_start: str = "00:00"
    output_dir: Optional[str] = None

    def __post_init__(self) -> None:
        if self.step <= 0:
            raise ConfigError("sim step must be > 0")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"sim scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.duration is not None and self.duration <= 0:
            raise ConfigError("sim duration must be > 0")
        parse_clock(self.clock_start)

    @property
    def clock_start_seconds(self) -> float:
        return parse_clock(self.clock_start)


@dataclass(frozen=True)
class EdsConfig:
    bridge: BridgeConfig = field(default_factory=BridgeConfig)
    amplifier: AmplifierConfig = field(default_factory=AmplifierConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    threshold: ThresholdSettings = field(default_factory=ThresholdSettings)
    accel: AccelTriggerConfig = field(default_factory=AccelTriggerConfig)
    rtc: RtcConfig = field(default_factory=RtcConfig)
    nanotimer: NanotimerConfig = field(default_factory=NanotimerConfig)
    supervisor: SupervisorConfig = field(default_factory=SupervisorConfig)
    power: PowerSettings = field(default_factory=PowerSettings)

    def resolve_threshold(self) -> Tuple[ThresholdConfig, float]:
        """Comparator threshold config and the strain it corresponds to."""
        base = ThresholdConfig(
            tap=0,
            pot_total_resistance=self.threshold.pot_total_resistance,
            excitation_voltage=self.bridge.excitation_voltage,
        )
        if self.threshold.tap is not None:
            thr = dataclasses.replace(base, tap=self.threshold.tap)
            return thr, strain_at_comparator_voltage(thr.voltage, self.bridge, self.amplifier)
        tap, effective = tap_for_strain_threshold(self.threshold.strain_ue, self.bridge, self.amplifier, base)
        return dataclasses.replace(base, tap=tap), effective


@dataclass(frozen=True)
class SimConfig:
    eds: EdsConfig = field(default_factory=EdsConfig)
    sim: SimSettings = field(default_factory=SimSettings)

    def with_step(self, step: float) -> "SimConfig":
        return dataclasses.replace(self, sim=dataclasses.replace(self.sim, step=step))


_SECTIONS = {
    "bridge": BridgeConfig,
    "amplifier": AmplifierConfig,
    "filter": FilterConfig,
    "threshold": ThresholdSettings,
    "accel": AccelTriggerConfig,
    "rtc": RtcConfig,
    "nanotimer": NanotimerConfig,
    "supervisor": SupervisorConfig,
    "power": PowerSettings,
}


def _build(cls, data: Any, where: str):
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    kwargs = dict(data)
    if "alarm1_times" in kwargs:
        kwargs["alarm1_times"] = tuple(kwargs["alarm1_times"])
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(data: Mapping[str, Any]) -> SimConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("config root must be a JSON object")
    unknown = sorted(set(data) - set(_SECTIONS) - {"sim"})
    if unknown:
        raise ConfigError(f"unknown top-level keys {unknown}")
    sections = {name: _build(cls, data[name], name) for name, cls in _SECTIONS.items() if name in data}
    eds = EdsConfig(**sections)
    sim = _build(SimSettings, data.get("sim", {}), "sim")
    return SimConfig(eds, sim)


def load_config(path: Union[str, Path]) -> SimConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(data)


def config_to_dict(cfg: SimConfig) -> Dict[str, Any]:
    out = {name: dataclasses.asdict(getattr(cfg.eds, name)) for name in _SECTIONS}
    out["rtc"]["alarm1_times"] = list(out["rtc"]["alarm1_times"])
    out["power"]["modules"] = {k: dict(v) for k, v in cfg.eds.power.modules.items()}
    out["sim"] = dataclasses.asdict(cfg.sim)
    return out


# presets for the lab experiments


def impact_test_config(step: float = 0.001) -> SimConfig:
    return SimConfig(
        EdsConfig(accel=AccelTriggerConfig(threshold=80.0, sample_rate=100.0, noise_mode="ultra_low_noise")),
        SimSettings(step=step, scenario="impact"),
    )


def strain_test_config(step: float = 0.001) -> SimConfig:
    # strain power is switched on at t = 0 so the ramp meets an energised bridge
    return SimConfig(
        EdsConfig(
            threshold=ThresholdSettings(strain_ue=1160.0),
            nanotimer=NanotimerConfig(first_rise=0.0, on_time=60.0),
        ),
        SimSettings(step=step, scenario="strain_ramp"),
    )


def daily_test_config(step: float = 0.001, seed: int = 0) -> SimConfig:
    return SimConfig(
        EdsConfig(
            threshold=ThresholdSettings(strain_ue=264.0),
            accel=AccelTriggerConfig(threshold=200.0, sample_rate=100.0),
            rtc=RtcConfig(alarm1_times=("07:05", "19:05")),
        ),
        SimSettings(step=step, scenario="daily", seed=seed),
    )


def quiet_test_config(step: float = 0.001) -> SimConfig:
    return SimConfig(EdsConfig(), SimSettings(step=step, scenario="quiet"))
