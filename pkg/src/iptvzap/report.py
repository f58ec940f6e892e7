"""CSV/JSON serialisation of simulation results.

CSV is the golden format: fixed column order, floats printed with six
decimals, missing values left empty. JSON carries the same records at full
precision with ``null`` for missing values.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._validation import check_real
from .engine import (CRITICAL_WAIT_MS, AggregateStats, ScenarioConfig, improvement_vs_baseline,
                     relative_change, switch_overhead)
from .exceptions import IncompleteSweepError, ParameterError

CONFIG_FIELDS = ("session_count", "shape", "gop_ms", "separation", "max_wait", "ordering",
                 "client_ordering", "shifts", "dwell", "event_budget", "master_seed", "pool_size")
STATS_FIELDS = ("event_count", "episode_count", "mean_wait_ms", "median_wait_ms", "p95_wait_ms",
                "fraction_le_250ms", "mean_switches", "mean_accumulative_ms",
                "mean_target_wait_ms")
BASELINE_FIELDS = ("overhead_pct", "improvement_pct", "accumulative_improvement_pct")
SUMMARY_FIELDS = CONFIG_FIELDS + STATS_FIELDS + BASELINE_FIELDS

CDF_FIELDS = ("upper_ms", "cumulative_fraction")

# Reference latency change (%) of randomized client
# ordering against the synchronized one, keyed by (separation, max_wait).
PUBLISHED_TABLE2 = {
    (3, 2): 4.31, (4, 3): 17.53, (5, 4): 16.31,
    (3, 3): 18.07, (4, 4): 19.91, (5, 5): 17.63,
    (3, 4): 14.24, (4, 5): 16.03, (5, 6): 17.05,
}
TABLE2_FIELDS = ("separation", "max_wait", "window", "synchronized_mean_ms",
                 "randomized_mean_ms", "change_pct", "published_pct")


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        text = f"{float(value):.6f}"
        return "0.000000" if text == "-0.000000" else text
    return str(value)


def _json_value(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return None if math.isnan(value) else float(value)
    return value


def csv_text(header: Sequence[str], rows: Iterable[Mapping]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(row.get(col)) for col in header])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Mapping]) -> Path:
    """Write atomically: a partial file never replaces a complete one."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(csv_text(header, rows))
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()
    return path


def write_json(path, records) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(records, Mapping):
        payload = {k: _json_value(v) for k, v in records.items()}
    else:
        payload = [{k: _json_value(v) for k, v in r.items()} for r in records]
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(json.dumps(payload, indent=2) + "\n")
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()
    return path


def read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def emit_cdf(stats: AggregateStats, bin_ms: float) -> list[dict]:
    """Rows ``(upper_ms, fraction of waits <= upper_ms)`` up to the GOP duration."""
    width = check_real(bin_ms, "bin_ms", minimum=0.0, strict=True)
    gop = stats.gop_ms
    nbins = max(1, math.ceil(gop / width - 1e-9))
    edges = [min((k + 1) * width, gop) for k in range(nbins)]
    ordered = np.sort(stats.waits)
    total = ordered.shape[0]
    rows = []
    for edge in edges:
        frac = np.searchsorted(ordered, edge, side="right") / total if total else 0.0
        rows.append({"upper_ms": float(edge), "cumulative_fraction": float(frac)})
    rows[-1]["cumulative_fraction"] = 1.0 if total else 0.0
    return rows


def emit_summary(config: ScenarioConfig, stats: AggregateStats,
                 baseline: AggregateStats | None = None) -> dict:
    """Flat record in :data:`SUMMARY_FIELDS` order; baseline fields are None without a baseline."""
    record = dict(config.as_dict())
    record.update({
        "event_count": stats.event_count,
        "episode_count": stats.episode_count,
        "mean_wait_ms": stats.mean_wait,
        "median_wait_ms": stats.median_wait,
        "p95_wait_ms": stats.p95_wait,
        "fraction_le_250ms": stats.fraction_within(CRITICAL_WAIT_MS),
        "mean_switches": stats.mean_switches,
        "mean_accumulative_ms": stats.mean_accumulative,
        "mean_target_wait_ms": stats.mean_target_wait,
        "overhead_pct": None,
        "improvement_pct": None,
        "accumulative_improvement_pct": None,
    })
    if baseline is not None:
        record["overhead_pct"] = switch_overhead(stats, baseline)
        record["improvement_pct"] = improvement_vs_baseline(stats, baseline)
        record["accumulative_improvement_pct"] = improvement_vs_baseline(
            stats, baseline, metric="accumulative")
    return {key: record[key] for key in SUMMARY_FIELDS}


@dataclass
class SweepResult:
    """Cells of a parameter sweep keyed by the tuple of axis values.

    ``baselines`` maps each cell key to the stats it is compared against; it
    may be empty when no improvements are reported.
    """

    axes: list[tuple[str, list]]
    configs: dict[tuple, ScenarioConfig]
    cells: dict[tuple, AggregateStats]
    baselines: dict[tuple, AggregateStats] = field(default_factory=dict)

    def keys(self) -> list[tuple]:
        return list(itertools.product(*[values for _, values in self.axes]))

    def check_complete(self, need_baselines: bool = False) -> None:
        for key in self.keys():
            if key not in self.cells:
                raise IncompleteSweepError(f"missing sweep cell {key}")
            if need_baselines and key not in self.baselines:
                raise IncompleteSweepError(f"missing baseline for sweep cell {key}")

    def rows(self) -> list[dict]:
        self.check_complete()
        names = [name for name, _ in self.axes]
        out = []
        for key in self.keys():
            row = dict(zip(names, key))
            row.update(emit_summary(self.configs[key], self.cells[key], self.baselines.get(key)))
            out.append(row)
        return out

    def header(self) -> tuple[str, ...]:
        names = tuple(name for name, _ in self.axes)
        return names + tuple(f for f in SUMMARY_FIELDS if f not in names)


def emit_table2(synchronized: Mapping[tuple, AggregateStats],
                randomized: Mapping[tuple, AggregateStats],
                separations: Sequence[int] = (3, 4, 5)) -> list[dict]:
    """Latency change of randomized client ordering against synchronized, per (S, max_wait)."""
    rows = []
    for offset, label in ((-1, "S-1"), (0, "S"), (1, "S+1")):
        for sep in separations:
            key = (sep, sep + offset)
            if key not in synchronized or key not in randomized:
                raise IncompleteSweepError(f"missing Table II cell {key}")
            a, b = synchronized[key], randomized[key]
            rows.append({
                "separation": sep, "max_wait": sep + offset, "window": label,
                "synchronized_mean_ms": a.mean_wait, "randomized_mean_ms": b.mean_wait,
                "change_pct": relative_change(b.mean_wait, a.mean_wait),
                "published_pct": PUBLISHED_TABLE2.get(key),
            })
    return rows


def summary_from_csv_row(row: Mapping[str, str]) -> dict:
    """Parse a summary CSV row back into typed values."""
    ints = {"session_count", "separation", "max_wait", "event_budget", "master_seed",
            "pool_size", "event_count", "episode_count"}
    strings = {"ordering", "client_ordering", "shifts", "dwell"}
    out = {}
    for key in SUMMARY_FIELDS:
        text = row[key]
        if key in strings:
            out[key] = text
        elif text == "":
            out[key] = None
        elif key in ints:
            out[key] = int(text)
        else:
            out[key] = float(text)
    return out


def validate_header(header: Sequence[str], expected: Sequence[str]) -> None:
    if tuple(header) != tuple(expected):
        raise ParameterError(f"unexpected columns {list(header)}")
