"""Writers for events.csv, power.csv and summary.json."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Union

from .engine import PowerTrace, SimResult
from .errors import OutputError
from .supervisor import EventLog

EVENTS_FILE = "events.csv"
POWER_FILE = "power.csv"
SUMMARY_FILE = "summary.json"


def power_csv_rows(trace: PowerTrace):
    yield ["time_s", "total_mA", *trace.modules]
    for t, row in zip(trace.times, trace.currents):
        yield [f"{t:.9f}", f"{sum(row):.9f}", *(f"{c:.9f}" for c in row)]
    if trace.currents:
        # closing row marks where the last segment ends
        last = trace.currents[-1]
        yield [f"{trace.end_time:.9f}", f"{sum(last):.9f}", *(f"{c:.9f}" for c in last)]


def write_power_csv(trace: PowerTrace, path: Union[str, Path]) -> None:
    try:
        with open(path, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(power_csv_rows(trace))
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def write_events_csv(events: EventLog, path: Union[str, Path]) -> None:
    try:
        Path(path).write_text(events.to_csv())
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def write_summary(summary: dict, path: Union[str, Path]) -> None:
    try:
        Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def write_outputs(result: SimResult, out_dir: Union[str, Path]) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out}: {exc}") from exc
    if result.events.path is None:
        write_events_csv(result.events, out / EVENTS_FILE)
    write_power_csv(result.power_trace, out / POWER_FILE)
    write_summary(result.summary, out / SUMMARY_FILE)
    return out
