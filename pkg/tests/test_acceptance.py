"""Acceptance criteria, one marker per criterion; conftest prints the tally."""

import math

import numpy as np
import pytest

from edsim.accel_trigger import FIFO_CAPACITY, AccelFifo, ingest_sample
from edsim.config import impact_test_config, strain_test_config
from edsim.engine import run_simulation
from edsim.harness import build_scenario, run
from edsim.power_ledger import (
    ModuleCurrentTable,
    ServiceLifeParams,
    average_current,
    duty_cycled_idle_current,
    instantaneous_current,
    service_life,
)
from edsim.strain_frontend import (
    AmplifierConfig,
    BridgeConfig,
    FilterState,
    amplifier_gain,
    bridge_output,
    filter_step,
    min_strain_threshold,
    strain_from_voltage,
)
from edsim.supervisor import SupervisorConfig

STEP = 0.001
STARTUP = SupervisorConfig().startup_latency


def _classes(result):
    return [(r.detect_time, r.event_class.value) for r in result.events]


# 1


@pytest.mark.criterion(1, "threshold math")
def test_min_strain_threshold():
    assert min_strain_threshold(2.07, 107.4) == pytest.approx(70.3, abs=0.1)


@pytest.mark.criterion(1, "threshold math")
def test_gain_for_470_ohm():
    assert amplifier_gain(470) == pytest.approx(107.38, abs=0.01)


@pytest.mark.criterion(1, "threshold math")
def test_bridge_output_100_ue():
    dv = bridge_output(100, BridgeConfig(gauge_factor=2.0, excitation_voltage=3.2))
    assert dv * 1e3 == pytest.approx(0.160, abs=0.001)


# 2


@pytest.mark.criterion(2, "current table totals")
@pytest.mark.parametrize(
    "mode,strain_on,expected_ua",
    [("inactive", False, 764.865), ("inactive", True, 6284.865), ("active", True, 7435.2)],
)
def test_mode_totals(mode, strain_on, expected_ua):
    total = instantaneous_current(ModuleCurrentTable(), mode, strain_on) * 1000
    assert total == pytest.approx(expected_ua, abs=1.0)


# 3


@pytest.mark.criterion(3, "duty-cycled idle current")
def test_duty_cycled_idle():
    assert duty_cycled_idle_current(6.28, 0.764, 60, 3600) == pytest.approx(0.856, abs=0.001)


# 4


@pytest.mark.criterion(4, "service life table")
@pytest.mark.parametrize(
    "pd,i_avg,life",
    [(0.01, 2.62, 3054), (0.05, 9.68, 826), (0.10, 18.51, 432), (0.20, 36.17, 221)],
)
def test_service_life_row(pd, i_avg, life):
    p = ServiceLifeParams(capacity=10_000, event_probability=pd, idle_current=0.856, sensing_current=177.86)
    assert average_current(p) == pytest.approx(i_avg, rel=0.01)
    assert service_life(p) == pytest.approx(life, rel=0.01)


# 5


@pytest.mark.criterion(5, "vibration trigger scenario")
def test_impact_single_vibration_event(impact_run):
    events = impact_run.events.records
    assert [e.event_class.value for e in events] == ["vibration"]
    assert events[0].detect_time == pytest.approx(9.5, abs=0.01)


@pytest.mark.criterion(5, "vibration trigger scenario")
def test_impact_latency(impact_run):
    (ev,) = impact_run.events.records
    assert ev.sense_start_time - ev.detect_time == pytest.approx(STARTUP, abs=STEP + 1e-9)


# 6


@pytest.mark.criterion(6, "strain trigger scenario")
def test_strain_single_strain_event(strain_run):
    assert [e.event_class.value for e in strain_run.events] == ["strain"]
    # filter lag puts detection a little after the raw crossing
    assert 8.132 <= strain_run.events.records[0].detect_time <= 8.132 + 0.05


@pytest.mark.criterion(6, "strain trigger scenario")
def test_strain_latency(strain_run):
    (ev,) = strain_run.events.records
    assert ev.sense_start_time - ev.detect_time == pytest.approx(STARTUP, abs=STEP + 1e-9)


@pytest.mark.criterion(6, "strain trigger scenario")
def test_programmed_threshold_within_half_step(strain_run):
    effective = strain_run.summary["strain_threshold"]["effective_strain_ue"]
    assert abs(effective - 1160.0) <= 35.2


# 7


@pytest.mark.criterion(7, "daily scenario tally")
def test_daily_counts(daily_run):
    assert daily_run.summary["counts"] == {"vibration": 13, "strain": 5, "timer": 2}
    assert len(daily_run.events) == 20


@pytest.mark.criterion(7, "daily scenario tally")
def test_daily_timer_events_at_alarms(daily_run):
    timers = [e for e in daily_run.summary["events"] if e["class"] == "timer"]
    assert [e["detect_clock"] for e in timers] == ["07:05:00", "19:05:00"]
    assert [e["detect_time_s"] for e in timers] == pytest.approx([25500.0, 68700.0], abs=STEP)
    for e in timers:
        assert e["peak_accel_mg"] < 200.0
        assert e["peak_strain_ue"] < 264.0


# 8


@pytest.mark.criterion(8, "property suites")
def test_bridge_round_trip_1000_strains():
    rng = np.random.default_rng(8)
    cfg = BridgeConfig()
    for strain in rng.uniform(-1e4, 1e4, 1000):
        assert strain_from_voltage(bridge_output(strain, cfg), cfg) == pytest.approx(strain, rel=1e-9)


@pytest.mark.criterion(8, "property suites")
def test_fifo_against_brute_force_1000_streams():
    rng = np.random.default_rng(88)
    for _ in range(1000):
        n = int(rng.integers(1, 800))
        vals = rng.normal(0, 50, (n, 3))
        fifo, full = AccelFifo(), []
        for k, (x, y, z) in enumerate(vals):
            ingest_sample(fifo, k * 0.01, x, y, z)
            full += [(k * 0.01, "x", x), (k * 0.01, "y", y), (k * 0.01, "z", z)]
        assert fifo.snapshot() == full[-FIFO_CAPACITY:]


@pytest.mark.criterion(8, "property suites")
def test_filter_bounded_and_step_response():
    rng = np.random.default_rng(888)
    f = FilterState()
    inputs = rng.uniform(-2, 2, 5000)
    for v in inputs:
        out = filter_step(f, float(v), 1e-4)
        assert -2 <= out <= 2
    g = FilterState()
    for _ in range(100):
        filter_step(g, 1.0, 1e-4)
    assert g.output_voltage == pytest.approx(1 - math.exp(-1), abs=1e-3)


@pytest.mark.criterion(8, "property suites")
def test_outputs_byte_identical(tmp_path):
    cfg = impact_test_config()
    blobs = []
    for name in ("a", "b"):
        out = tmp_path / name
        run(cfg, out)
        blobs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert blobs[0] == blobs[1]
    assert set(blobs[0]) == {"events.csv", "power.csv", "summary.json"}


@pytest.mark.criterion(8, "property suites")
@pytest.mark.parametrize("make", [impact_test_config, strain_test_config])
def test_step_halving_lab_scenarios(make):
    coarse = run_simulation(build_scenario(make()), make())
    fine = run_simulation(build_scenario(make(0.0005)), make(0.0005))
    _assert_same_events(coarse, fine)


@pytest.mark.criterion(8, "property suites")
def test_step_halving_daily(daily_run, daily_run_half_step):
    _assert_same_events(daily_run, daily_run_half_step)


def _assert_same_events(coarse, fine):
    a, b = coarse.events.records, fine.events.records
    assert [r.event_class for r in a] == [r.event_class for r in b]
    for x, y in zip(a, b):
        assert abs(x.detect_time - y.detect_time) <= STEP + 1e-9
