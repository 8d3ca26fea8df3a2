"""Run-log persistence: run.csv (per-tick table), events.json (event stream
plus run metadata), and the batch summary.csv.

Floats are written with repr so the exported values round-trip bit-exactly;
recomputing metrics from a loaded log therefore reproduces the in-run
numbers exactly. Loading validates the file shape and fails loudly on
truncation or schema drift instead of returning a silently wrong log.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .simulation import ROW_FIELDS, RunLog

RUN_CSV = "run.csv"
EVENTS_JSON = "events.json"


class RunLogFormatError(ValueError):
    """Exported run log is unreadable or structurally inconsistent."""


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def export_runlog(log: RunLog, out_dir) -> Path:
    """Write run.csv and events.json into out_dir; returns the directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / RUN_CSV, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ROW_FIELDS)
        for row in log.rows:
            writer.writerow([_fmt(v) for v in row])
    payload = {"meta": log.meta, "events": log.events}
    with open(out / EVENTS_JSON, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    return out


def load_runlog(run_dir) -> RunLog:
    """Reconstruct a RunLog from an exported directory.

    Raises RunLogFormatError (with the offending file/line) on missing files,
    header drift, malformed rows, or a row count that does not tile into
    whole ticks.
    """
    run_dir = Path(run_dir)
    csv_path = run_dir / RUN_CSV
    events_path = run_dir / EVENTS_JSON
    if not csv_path.exists():
        raise RunLogFormatError(f"missing {csv_path}")
    if not events_path.exists():
        raise RunLogFormatError(f"missing {events_path}")

    try:
        with open(events_path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as e:
        raise RunLogFormatError(f"{events_path}: invalid JSON: {e}") from None
    if not isinstance(payload, dict) or "meta" not in payload or "events" not in payload:
        raise RunLogFormatError(f"{events_path}: expected object with 'meta' and 'events'")
    meta = payload["meta"]
    for key in ("n", "dt", "seed", "policy"):
        if key not in meta:
            raise RunLogFormatError(f"{events_path}: meta missing {key!r}")
    n = int(meta["n"])

    rows = []
    with open(csv_path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise RunLogFormatError(f"{csv_path}: empty file") from None
        if tuple(header) != ROW_FIELDS:
            raise RunLogFormatError(f"{csv_path}: unexpected header {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(ROW_FIELDS):
                raise RunLogFormatError(
                    f"{csv_path}:{lineno}: expected {len(ROW_FIELDS)} fields, got {len(row)}"
                )
            try:
                rows.append(
                    (
                        int(row[0]),
                        float(row[1]),
                        int(row[2]),
                        float(row[3]),
                        float(row[4]),
                        float(row[5]),
                        float(row[6]),
                        float(row[7]),
                        float(row[8]),
                        row[9],
                        float(row[10]) if row[10] else None,
                        float(row[11]) if row[11] else None,
                        row[12] == "1",
                    )
                )
            except ValueError as e:
                raise RunLogFormatError(f"{csv_path}:{lineno}: {e}") from None
    if n <= 0 or len(rows) % n != 0:
        raise RunLogFormatError(
            f"{csv_path}: {len(rows)} rows do not tile into ticks of {n} blimps (truncated?)"
        )
    return RunLog(n=n, dt=float(meta["dt"]), meta=meta, rows=rows, events=payload["events"])


SUMMARY_FIELDS = ("seed", "policy", "completed", "average_area", "area_rmse")


def write_summary(path, entries) -> Path:
    """Batch summary: one row per run with its headline metrics."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_FIELDS)
        for e in entries:
            writer.writerow(
                [
                    e["seed"],
                    e["policy"],
                    "1" if e["completed"] else "0",
                    repr(float(e["average_area"])),
                    repr(float(e["area_rmse"])),
                ]
            )
    return path
