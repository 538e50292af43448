import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edsim.errors import ConfigError, UndefinedServiceLifeError
from edsim.power_ledger import (
    MODULES,
    ModuleCurrentTable,
    PowerLedger,
    ServiceLifeParams,
    average_current,
    duty_cycled_idle_current,
    instantaneous_current,
    integrate,
    module_currents,
    service_life,
    service_life_table,
)

# published per-module currents in uA: (inactive, active)
TABLE_ROWS_UA = {
    "comparator": (0.58, 0.58),
    "instrument_amplifier": (450.0, 1400.0),
    "wheatstone_bridge": (0.0, 4570.0),
    "potentiometer": (300.0, 300.0),
    "timer": (0.035, 0.035),
    "digital_logic": (0.9, 1.6),
    "mcu": (0.1, 900.0),
    "rtc": (0.25, 250.0),
    "accelerometer": (13.0, 13.0),
}
STRAIN_SWITCHED = {"instrument_amplifier", "wheatstone_bridge"}


def test_defaults_match_table_rows():
    table = ModuleCurrentTable()
    assert set(MODULES) == set(TABLE_ROWS_UA)
    for name, (idle, active) in TABLE_ROWS_UA.items():
        assert table[name].inactive * 1000 == pytest.approx(idle)
        assert table[name].active * 1000 == pytest.approx(active)


def test_mode_totals():
    table = ModuleCurrentTable()
    off = sum(v[0] for v in TABLE_ROWS_UA.values())
    on = sum(v[1] if k in STRAIN_SWITCHED else v[0] for k, v in TABLE_ROWS_UA.items())
    active = sum(v[1] for v in TABLE_ROWS_UA.values())
    assert (off, on, active) == pytest.approx((764.865, 6284.865, 7435.215))
    assert instantaneous_current(table, "inactive", False) * 1000 == pytest.approx(off, abs=1e-6)
    assert instantaneous_current(table, "inactive", True) * 1000 == pytest.approx(on, abs=1e-6)
    assert instantaneous_current(table, "active", True) * 1000 == pytest.approx(active, abs=1e-6)
    # active mode powers the strain circuit regardless of the flag
    assert instantaneous_current(table, "active", False) == instantaneous_current(table, "active", True)


def test_module_currents_rejects_unknown_mode():
    with pytest.raises(ValueError):
        module_currents(ModuleCurrentTable(), "sleeping", False)


def test_overrides():
    table = ModuleCurrentTable().with_overrides({"mcu": {"active": 1.2}})
    assert table["mcu"].active == 1.2
    with pytest.raises(ConfigError):
        ModuleCurrentTable().with_overrides({"radio": {"active": 1.0}})
    with pytest.raises(ConfigError):
        ModuleCurrentTable().with_overrides({"mcu": {"active": -1.0}})


def test_integrate_unit_and_zero():
    ledger = PowerLedger()
    integrate(ledger, 1.0, 3600.0)
    assert ledger.total == pytest.approx(1.0)
    zero = PowerLedger()
    integrate(zero, 0.0, 12345.0)
    assert zero.total == 0.0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.001, 1000.0), min_size=1, max_size=50), st.floats(0.0, 50.0))
def test_integrate_additivity(durations, current):
    pieces = PowerLedger()
    for dt in durations:
        integrate(pieces, current, dt)
    single = PowerLedger()
    integrate(single, current, sum(durations))
    assert pieces.total == pytest.approx(single.total, rel=1e-12, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(MODULES), st.floats(0, 10), st.floats(0.001, 100)), max_size=40))
def test_total_equals_module_sum(entries):
    ledger = PowerLedger()
    for name, i, dt in entries:
        integrate(ledger, {name: i}, dt)
    assert sum(ledger.charge.values()) == pytest.approx(ledger.total, rel=1e-9, abs=1e-15)


def test_duty_cycled_idle_current():
    assert duty_cycled_idle_current(6.28, 0.764, 60, 3600) == pytest.approx(0.856, abs=1e-3)
    assert duty_cycled_idle_current(6.28, 0.764, 3600, 3600) == pytest.approx(6.28)
    assert duty_cycled_idle_current(2.0, 2.0, 17, 3600) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        duty_cycled_idle_current(6.28, 0.764, 0, 3600)
    with pytest.raises(ValueError):
        duty_cycled_idle_current(6.28, 0.764, 4000, 3600)


def test_average_current_examples():
    assert average_current(ServiceLifeParams(event_probability=0.01)) == pytest.approx(2.626, abs=1e-3)
    assert average_current(ServiceLifeParams(event_probability=0.0)) == pytest.approx(0.856)
    assert average_current(ServiceLifeParams(event_probability=1.0)) == pytest.approx(177.86)


@given(st.floats(0.0, 1.0))
def test_average_current_linear_in_probability(pd):
    lo = average_current(ServiceLifeParams(event_probability=0.0))
    hi = average_current(ServiceLifeParams(event_probability=1.0))
    assert average_current(ServiceLifeParams(event_probability=pd)) == pytest.approx(lo + pd * (hi - lo), rel=1e-12)


def test_service_life_examples():
    assert 3046 <= service_life(ServiceLifeParams(event_probability=0.01)) <= 3054
    assert service_life(ServiceLifeParams(event_probability=0.20)) == pytest.approx(221, rel=0.01)
    assert service_life(ServiceLifeParams(capacity=0.0, event_probability=0.3)) == 0.0
    with pytest.raises(UndefinedServiceLifeError):
        service_life(ServiceLifeParams(idle_current=0.0, event_probability=0.0))


def test_service_life_decreasing():
    rows = service_life_table([k / 100 for k in range(101)])
    lives = [life for _, _, life in rows]
    assert all(b < a for a, b in zip(lives, lives[1:]))


def test_params_validation():
    with pytest.raises(ConfigError):
        ServiceLifeParams(event_probability=1.5)
    with pytest.raises(ConfigError):
        ServiceLifeParams(derating=0.0)
    with pytest.raises(ConfigError):
        ServiceLifeParams(capacity=-1)
