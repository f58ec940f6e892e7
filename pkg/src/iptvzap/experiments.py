"""Scenario matrices behind each reproduced figure and table.

Three wirings are used throughout:

* synchronized: the client surfs the network grid and shifts are laddered;
* randomized ordering: each client surfs its own randomized grid while the
  shifts stay laddered on the network grid;
* randomized shifts: the network grid with uniformly drawn key-frame phases.

Baselines are the same wiring surfed strictly in order (``max_wait = 1``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .analytics import PUBLISHED_SWITCH_COUNTS, switch_count_report
from .engine import (AggregateStats, ClientOrdering, ScenarioConfig, improvement_vs_baseline,
                     relative_change, run_scenario, switch_overhead)
from .exceptions import ParameterError
from .phase import ShiftKind
from .report import (CDF_FIELDS, SUMMARY_FIELDS, TABLE2_FIELDS, SweepResult, emit_cdf,
                     emit_table2, write_csv)

log = logging.getLogger(__name__)

EXHIBITS = ("table1", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "table2")

SEPARATIONS = (3, 4, 5, 6)
WAITS = tuple(range(2, 11))
FIG6_CASES = ((3, 2), (4, 3), (6, 5))
TABLE2_SEPARATIONS = (3, 4, 5)


def synchronized(base: ScenarioConfig, separation: int, max_wait: int) -> ScenarioConfig:
    return base.with_(separation=separation, max_wait=max_wait,
                      client_ordering=ClientOrdering.SAME, shifts=ShiftKind.LADDERED)


def randomized_ordering(base: ScenarioConfig, separation: int, max_wait: int) -> ScenarioConfig:
    return synchronized(base, separation, max_wait).with_(client_ordering=ClientOrdering.RANDOMIZED)


def randomized_shifts(base: ScenarioConfig, separation: int, max_wait: int) -> ScenarioConfig:
    return synchronized(base, separation, max_wait).with_(shifts=ShiftKind.RANDOMIZED)


WIRINGS = {
    "synchronized": synchronized,
    "randomized-ordering": randomized_ordering,
    "randomized-shifts": randomized_shifts,
}


def table2_cells(separations=TABLE2_SEPARATIONS) -> list[tuple[int, int]]:
    return [(s, s + d) for d in (-1, 0, 1) for s in separations]


@dataclass
class Runner:
    """Runs configs once each; exhibits that share cells reuse the results."""

    threads: int = 1
    bin_ms: float = 10.0
    cache: dict[ScenarioConfig, AggregateStats] = field(default_factory=dict)

    def __call__(self, config: ScenarioConfig) -> AggregateStats:
        stats = self.cache.get(config)
        if stats is None:
            log.info("running %s", config)
            stats = run_scenario(config, threads=self.threads, bin_ms=self.bin_ms)
            self.cache[config] = stats
        return stats

    def baseline(self, config: ScenarioConfig) -> AggregateStats:
        return self(config.with_(max_wait=1))


def table1_rows(session_counts=(100, 200, 300, 400, 500), orderings=("one-step", "two-step"),
                shape: float = 1.0) -> list[dict]:
    rows = []
    for ordering in orderings:
        for n in session_counts:
            rep = switch_count_report(ordering, n, shape)
            rows.append({"ordering": rep.grid_label, "session_count": n, "shape": shape,
                         "expected_switches": rep.expected_switches,
                         "published": PUBLISHED_SWITCH_COUNTS.get((rep.grid_label, n))})
    return rows


TABLE1_FIELDS = ("ordering", "session_count", "shape", "expected_switches", "published")


def sweep(runner: Runner, base: ScenarioConfig, wiring: str | None, separations,
          waits) -> SweepResult:
    """Grid over separation x max_wait; ``wiring=None`` keeps ``base``'s own wiring."""
    if wiring is None:
        def make(cfg, sep, w):
            return cfg.with_(separation=sep, max_wait=w)
    else:
        make = WIRINGS[wiring]
    axes = [("separation", list(separations)), ("max_wait", list(waits))]
    configs, cells, baselines = {}, {}, {}
    for sep in separations:
        for w in waits:
            cfg = make(base, sep, w)
            configs[(sep, w)] = cfg
            cells[(sep, w)] = runner(cfg)
            baselines[(sep, w)] = runner.baseline(cfg)
    return SweepResult(axes, configs, cells, baselines)


def comparison_rows(runner: Runner, base: ScenarioConfig, wiring: str, separations,
                    waits) -> list[dict]:
    """Per-cell latency of ``wiring`` against the synchronized wiring."""
    rows = []
    for sep in separations:
        for w in waits:
            ref = runner(synchronized(base, sep, w))
            other = runner(WIRINGS[wiring](base, sep, w))
            rows.append({"separation": sep, "max_wait": w,
                         "synchronized_mean_ms": ref.mean_wait,
                         f"{wiring}_mean_ms": other.mean_wait,
                         "change_pct": relative_change(other.mean_wait, ref.mean_wait)})
    return rows


def accumulative_rows(runner: Runner, base: ScenarioConfig,
                      cells=None) -> list[dict]:
    rows = []
    for wiring, make in WIRINGS.items():
        for sep, w in cells or table2_cells():
            cfg = make(base, sep, w)
            stats, ref = runner(cfg), runner.baseline(cfg)
            rows.append({"wiring": wiring, "separation": sep, "max_wait": w,
                         "mean_accumulative_ms": stats.mean_accumulative,
                         "baseline_accumulative_ms": ref.mean_accumulative,
                         "accumulative_improvement_pct":
                             improvement_vs_baseline(stats, ref, "accumulative"),
                         "improvement_pct": improvement_vs_baseline(stats, ref),
                         "overhead_pct": switch_overhead(stats, ref)})
    return rows


ACCUMULATIVE_FIELDS = ("wiring", "separation", "max_wait", "mean_accumulative_ms",
                       "baseline_accumulative_ms", "accumulative_improvement_pct",
                       "improvement_pct", "overhead_pct")


def cdf_rows(runner: Runner, base: ScenarioConfig, cases=FIG6_CASES, bin_ms: float = 10.0):
    rows = []
    for sep, w in cases:
        for row in emit_cdf(runner(synchronized(base, sep, w)), bin_ms):
            rows.append({"separation": sep, "max_wait": w, **row})
    baseline = runner.baseline(synchronized(base, FIG6_CASES[0][0], 1))
    for row in emit_cdf(baseline, bin_ms):
        rows.append({"separation": FIG6_CASES[0][0], "max_wait": 1, **row})
    return rows


def reproduce(exhibit: str, base: ScenarioConfig, out_dir, runner: Runner | None = None,
              bin_ms: float = 10.0) -> list[Path]:
    """Run the scenario matrix for one exhibit and write its table(s) under ``out_dir/exhibit``."""
    if exhibit not in EXHIBITS:
        raise ParameterError(f"unknown exhibit {exhibit!r}; choose from {', '.join(EXHIBITS)}")
    runner = runner or Runner(bin_ms=bin_ms)
    target = Path(out_dir) / exhibit
    if exhibit == "table1":
        return [write_csv(target / "table1.csv", TABLE1_FIELDS,
                          table1_rows(shape=base.shape))]
    if exhibit in ("fig4", "fig5"):
        result = sweep(runner, base, "synchronized", SEPARATIONS, (1,) + WAITS)
        return [write_csv(target / "sweep.csv", result.header(), result.rows())]
    if exhibit == "fig6":
        return [write_csv(target / "cdf.csv", ("separation", "max_wait") + CDF_FIELDS,
                          cdf_rows(runner, base, bin_ms=bin_ms))]
    if exhibit == "fig7":
        result = sweep(runner, base, "randomized-ordering", SEPARATIONS, WAITS)
        return [write_csv(target / "sweep.csv", result.header(), result.rows())]
    if exhibit == "fig8":
        # separation has no effect once phases are random
        result = sweep(runner, base, "randomized-shifts", (base.separation,), (1,) + WAITS)
        return [write_csv(target / "sweep.csv", result.header(), result.rows())]
    if exhibit == "fig9":
        rows = comparison_rows(runner, base, "randomized-shifts", SEPARATIONS, WAITS)
        header = ("separation", "max_wait", "synchronized_mean_ms",
                  "randomized-shifts_mean_ms", "change_pct")
        return [write_csv(target / "sweep.csv", header, rows)]
    if exhibit == "fig10":
        return [write_csv(target / "sweep.csv", ACCUMULATIVE_FIELDS,
                          accumulative_rows(runner, base))]
    # table2
    sync = {key: runner(synchronized(base, *key)) for key in table2_cells()}
    rand = {key: runner(randomized_ordering(base, *key)) for key in table2_cells()}
    return [write_csv(target / "table2.csv", TABLE2_FIELDS, emit_table2(sync, rand))]


__all__ = ["EXHIBITS", "Runner", "reproduce", "sweep", "table1_rows", "SUMMARY_FIELDS"]
