"""Low-power MEMS accelerometer trigger: activity detection and FIFO."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Deque, List, Sequence, Tuple

from .errors import ConfigError

FIFO_CAPACITY = 512
SAMPLE_RATES = (12.5, 25.0, 50.0, 100.0, 200.0, 400.0)
NOISE_MODES = ("low_power", "ultra_low_noise")

AXES = ("x", "y", "z")

FifoEntry = Tuple[float, str, float]


@dataclass(frozen=True)
class AccelTriggerConfig:
    threshold: float = 80.0
    sample_rate: float = 100.0
    noise_mode: str = "ultra_low_noise"
    fifo_capacity: int = FIFO_CAPACITY
    supply_current: float = 13.0  # uA

    def __post_init__(self) -> None:
        if self.threshold <= 0:
            raise ConfigError("accel threshold must be > 0")
        if float(self.sample_rate) not in SAMPLE_RATES:
            raise ConfigError(f"accel sample_rate must be one of {SAMPLE_RATES}, got {self.sample_rate}")
        if self.noise_mode not in NOISE_MODES:
            raise ConfigError(f"accel noise_mode must be one of {NOISE_MODES}")
        if self.fifo_capacity != FIFO_CAPACITY:
            raise ConfigError(f"accel fifo_capacity is fixed at {FIFO_CAPACITY}")


@dataclass
class AccelFifo:
    """Ring buffer of per-axis samples; the 512 slots are shared by all axes."""

    capacity: int = FIFO_CAPACITY
    entries: Deque[FifoEntry] = field(default_factory=deque)
    last_time: float = float("-inf")

    def __post_init__(self) -> None:
        self.entries = deque(self.entries, maxlen=self.capacity)

    def __len__(self) -> int:
        return len(self.entries)

    def snapshot(self) -> List[FifoEntry]:
        return list(self.entries)

    def span(self) -> float:
        if not self.entries:
            return 0.0
        return self.entries[-1][0] - self.entries[0][0]


def ingest_sample(fifo: AccelFifo, t: float, ax: float, ay: float, az: float) -> None:
    if t <= fifo.last_time:
        raise ValueError(f"sample time {t} not after previous sample {fifo.last_time}")
    fifo.last_time = t
    fifo.entries.append((t, "x", ax))
    fifo.entries.append((t, "y", ay))
    fifo.entries.append((t, "z", az))


def activity_detect(sample: Sequence[float], cfg: AccelTriggerConfig) -> int:
    """Absolute-value, any-axis, single-sample activity rule."""
    return 1 if max(abs(v) for v in sample) > cfg.threshold else 0


def fifo_peak(entries: Sequence[FifoEntry]) -> float:
    return max((abs(v) for _, _, v in entries), default=0.0)
