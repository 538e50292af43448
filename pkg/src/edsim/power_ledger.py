"""Per-module current table, charge accounting and battery service life.

Currents are in mA, charge in mAh, times in seconds, service life in hours.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

from .errors import ConfigError, UndefinedServiceLifeError

MODULES: Tuple[str, ...] = (
    "comparator",
    "instrument_amplifier",
    "wheatstone_bridge",
    "potentiometer",
    "timer",
    "digital_logic",
    "mcu",
    "rtc",
    "accelerometer",
)

ALWAYS_ON = None


@dataclass(frozen=True)
class ModuleCurrent:
    """One row of the current table.

    ``inactive`` is the idle draw with strain power off. Strain-switched
    modules jump to ``active`` whenever strain power is on, regardless of
    device mode. ``activity_time`` is seconds of active draw per event, or
    None for modules whose draw does not depend on events.
    """

    inactive: float
    active: float
    activity_time: Optional[float] = ALWAYS_ON
    strain_switched: bool = False

    def __post_init__(self) -> None:
        if self.inactive < 0 or self.active < 0:
            raise ConfigError("module currents must be >= 0")
        if self.activity_time is not None and self.activity_time < 0:
            raise ConfigError("activity_time must be >= 0")


def _default_rows() -> Dict[str, ModuleCurrent]:
    return {
        "comparator": ModuleCurrent(580e-6, 580e-6),
        "instrument_amplifier": ModuleCurrent(0.450, 1.4, strain_switched=True),
        "wheatstone_bridge": ModuleCurrent(0.0, 4.57, strain_switched=True),
        "potentiometer": ModuleCurrent(0.300, 0.300),
        "timer": ModuleCurrent(35e-6, 35e-6),
        "digital_logic": ModuleCurrent(0.9e-3, 1.6e-3, activity_time=5.5e-9),
        "mcu": ModuleCurrent(0.1e-3, 0.9, activity_time=4e-3),
        "rtc": ModuleCurrent(250e-6, 0.250, activity_time=20e-3),
        "accelerometer": ModuleCurrent(13e-3, 13e-3),
    }


@dataclass(frozen=True)
class ModuleCurrentTable:
    rows: Mapping[str, ModuleCurrent] = field(default_factory=_default_rows)

    def __post_init__(self) -> None:
        missing = set(MODULES) - set(self.rows)
        unknown = set(self.rows) - set(MODULES)
        if missing or unknown:
            raise ConfigError(f"current table mismatch: missing={sorted(missing)} unknown={sorted(unknown)}")

    def __getitem__(self, name: str) -> ModuleCurrent:
        return self.rows[name]

    def with_overrides(self, overrides: Mapping[str, Mapping[str, float]]) -> "ModuleCurrentTable":
        rows = dict(self.rows)
        for name, vals in overrides.items():
            if name not in rows:
                raise ConfigError(f"unknown module {name!r} in current table")
            try:
                rows[name] = replace(rows[name], **vals)
            except TypeError as exc:
                raise ConfigError(f"bad override for {name!r}: {exc}") from exc
        return ModuleCurrentTable(rows)


def module_currents(
    table: ModuleCurrentTable,
    device_mode: str,
    strain_power_on: bool,
) -> Dict[str, float]:
    if device_mode not in ("inactive", "active"):
        raise ValueError(f"device_mode must be 'inactive' or 'active', got {device_mode!r}")
    active = device_mode == "active"
    out = {}
    for name in MODULES:
        row = table[name]
        if row.strain_switched:
            out[name] = row.active if (strain_power_on or active) else row.inactive
        else:
            out[name] = row.active if active else row.inactive
    return out


def instantaneous_current(table: ModuleCurrentTable, device_mode: str, strain_power_on: bool) -> float:
    return sum(module_currents(table, device_mode, strain_power_on).values())


@dataclass
class PowerLedger:
    charge: Dict[str, float] = field(default_factory=lambda: {m: 0.0 for m in MODULES})
    total: float = 0.0
    elapsed: float = 0.0

    def add(self, module: str, current: float, dt: float) -> None:
        if dt <= 0:
            raise ValueError(f"dt must be > 0, got {dt}")
        q = current * dt / 3600.0
        self.charge[module] = self.charge.get(module, 0.0) + q
        self.total += q

    def add_charge(self, module: str, mah: float) -> None:
        self.charge[module] = self.charge.get(module, 0.0) + mah
        self.total += mah

    def average_current(self) -> float:
        if self.elapsed <= 0:
            return 0.0
        return self.total * 3600.0 / self.elapsed


def integrate(
    ledger: PowerLedger,
    current: Union[float, Mapping[str, float]],
    dt: float,
    module: str = "total",
) -> None:
    """Accumulate ``current * dt`` into the ledger.

    ``current`` is either a single value charged to ``module`` or a mapping
    of per-module currents. Advances the ledger clock by ``dt``.
    """
    if isinstance(current, Mapping):
        for name, value in current.items():
            ledger.add(name, value, dt)
    else:
        ledger.add(module, current, dt)
    ledger.elapsed += dt


def duty_cycled_idle_current(on_current: float, off_current: float, on_time: float, period: float) -> float:
    if not 0 < on_time <= period:
        raise ValueError(f"need 0 < on_time <= period, got on_time={on_time}, period={period}")
    return (on_current * on_time + off_current * (period - on_time)) / period


@dataclass(frozen=True)
class ServiceLifeParams:
    capacity: float = 10_000.0
    event_probability: float = 0.01
    idle_current: float = 0.856
    sensing_current: float = 177.86
    derating: float = 0.8

    def __post_init__(self) -> None:
        if not 0 <= self.event_probability <= 1:
            raise ConfigError("event_probability must be in [0, 1]")
        if self.capacity < 0:
            raise ConfigError("capacity must be >= 0")
        if not 0 < self.derating <= 1:
            raise ConfigError("derating must be in (0, 1]")
        if self.idle_current < 0 or self.sensing_current < 0:
            raise ConfigError("currents must be >= 0")


def average_current(p: ServiceLifeParams) -> float:
    ta = p.event_probability
    return p.idle_current * (1 - ta) + p.sensing_current * ta


def service_life(p: ServiceLifeParams) -> float:
    i_avg = average_current(p)
    if i_avg <= 0:
        raise UndefinedServiceLifeError("average current is zero; service life is undefined")
    return p.capacity / i_avg * p.derating


def service_life_table(
    probabilities: Iterable[float],
    base: ServiceLifeParams = ServiceLifeParams(),
) -> list:
    rows = []
    for pd in probabilities:
        p = replace(base, event_probability=pd)
        rows.append((pd, average_current(p), service_life(p)))
    return rows
