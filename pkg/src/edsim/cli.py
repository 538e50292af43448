"""Command-line front end: ``edsim run|service-life|threshold|budget``."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .config import load_config
from .errors import ConfigError, OutputError, UndefinedServiceLifeError, UnreachableThresholdError
from .harness import run
from .power_ledger import MODULES, ModuleCurrentTable, ServiceLifeParams, average_current, module_currents, service_life
from .strain_frontend import AmplifierConfig, BridgeConfig, ThresholdConfig, min_strain_threshold, tap_for_strain_threshold

EXIT_CONFIG = 2
EXIT_OUTPUT = 3


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    result = run(cfg, args.out, seed=args.seed)
    s = result.summary
    c = s["counts"]
    print(f"events: {s['total_events']} (vibration {c['vibration']}, strain {c['strain']}, timer {c['timer']})")
    print(f"charge: {s['charge_mAh']:.6f} mAh over {s['duration_s']:.0f} s, average {s['avg_mA']:.6f} mA")
    print(f"outputs written to {args.out}")
    return 0


def _cmd_service_life(args) -> int:
    defaults = ServiceLifeParams()
    p = ServiceLifeParams(
        capacity=args.capacity,
        event_probability=args.pd,
        idle_current=defaults.idle_current if args.idle is None else args.idle,
        sensing_current=defaults.sensing_current if args.sensing is None else args.sensing,
    )
    print(f"average current: {average_current(p):.4f} mA")
    print(f"service life: {service_life(p):.1f} h")
    return 0


def _cmd_threshold(args) -> int:
    bridge = BridgeConfig(gauge_factor=args.gf)
    amp = AmplifierConfig(gain_resistor=args.rg)
    tap, effective = tap_for_strain_threshold(args.strain, bridge, amp, ThresholdConfig(tap=0))
    v_th = ThresholdConfig(tap=tap).voltage
    print(f"gain: {amp.gain:.3f}")
    print(f"resolution: {min_strain_threshold(bridge.gauge_factor, amp.gain):.2f} ue per tap")
    print(f"tap: {tap}")
    print(f"V_TH: {v_th:.6f} V")
    print(f"effective strain: {effective:.2f} ue")
    return 0


def _cmd_budget(args) -> int:
    table = ModuleCurrentTable()
    mode = "active" if args.active else "inactive"
    currents = module_currents(table, mode, args.strain_on)
    width = max(len(m) for m in MODULES)
    print(f"{'module':<{width}}  current (uA)")
    for name in MODULES:
        print(f"{name:<{width}}  {currents[name] * 1000:12.3f}")
    print(f"{'total':<{width}}  {sum(currents.values()) * 1000:12.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a configured scenario")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override sim.seed")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("service-life", help="average current and battery life for an event probability")
    p.add_argument("--capacity", type=float, required=True, help="battery capacity, mAh")
    p.add_argument("--pd", type=float, required=True, help="event probability as a fraction")
    p.add_argument("--idle", type=float, default=None, help="idle current, mA")
    p.add_argument("--sensing", type=float, default=None, help="sensing current, mA")
    p.set_defaults(func=_cmd_service_life)

    p = sub.add_parser("threshold", help="pot tap for a strain threshold")
    p.add_argument("--strain", type=float, required=True, help="target strain, microstrain")
    p.add_argument("--gf", type=float, default=BridgeConfig.gauge_factor, help="gauge factor")
    p.add_argument("--rg", type=float, default=AmplifierConfig.gain_resistor, help="gain resistor, ohm")
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("budget", help="per-module current breakdown")
    p.add_argument("--strain-on", action="store_true", help="strain circuit powered")
    p.add_argument("--active", action="store_true", help="device active")
    p.set_defaults(func=_cmd_budget)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnreachableThresholdError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UndefinedServiceLifeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
