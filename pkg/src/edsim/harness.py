"""Glue between a loaded config, the scenario generators and the engine."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from .config import SimConfig
from .engine import SimResult, run_simulation
from .errors import OutputError
from .outputs import EVENTS_FILE, write_outputs
from .scenarios import Scenario, gen_daily_scenario, impact_scenario, quiet_scenario, strain_ramp_scenario
from .supervisor import EventLog


def build_scenario(config: SimConfig, seed: Optional[int] = None) -> Scenario:
    sim, eds = config.sim, config.eds
    seed = sim.seed if seed is None else seed
    clock = sim.clock_start_seconds
    if sim.scenario == "impact":
        sc = impact_scenario(threshold=eds.accel.threshold, duration=sim.duration or 135.0)
    elif sim.scenario == "strain_ramp":
        _, effective = eds.resolve_threshold()
        sc = strain_ramp_scenario(effective, duration=sim.duration or 135.0)
    elif sim.scenario == "quiet":
        sc = quiet_scenario(sim.duration or 86400.0)
    else:
        nt = eds.nanotimer
        sc = gen_daily_scenario(
            seed,
            accel_thr=eds.accel.threshold,
            strain_thr=eds.threshold.strain_ue or eds.resolve_threshold()[1],
            clock_start=clock,
            drv_interval=nt.interval,
            drv_on_time=nt.on_time,
            drv_first_rise=nt.first_rise,
            alarm_clocks=eds.rtc.alarm1_times,
        )
        if sim.duration is not None:
            sc.duration = sim.duration
    sc.clock_start = clock
    sc.seed = seed
    return sc


def run(
    config: SimConfig,
    out_dir: Union[str, Path, None] = None,
    seed: Optional[int] = None,
) -> SimResult:
    """Build the configured scenario, simulate it and write outputs to ``out_dir``."""
    scenario = build_scenario(config, seed)
    out_dir = out_dir if out_dir is not None else config.sim.output_dir
    log = None
    if out_dir is not None:
        try:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory {out_dir}: {exc}") from exc
        log = EventLog(Path(out_dir) / EVENTS_FILE)
    result = run_simulation(scenario, config, log)
    if out_dir is not None:
        write_outputs(result, out_dir)
    return result
