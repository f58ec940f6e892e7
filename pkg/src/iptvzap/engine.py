"""Seeded Monte Carlo driver for surfing episodes.

Every episode draws from its own generator, seeded from
``(master_seed, episode index)``. Episodes run in fixed-size blocks and
results are concatenated in episode order. The same seed and config therefore
give the same raw arrays, and the same statistics, for any worker count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from functools import cached_property

import numpy as np

from ._validation import check_int, check_real
from .exceptions import ParameterError, UndefinedRatioError
from .grid import ChannelGrid, OrderingKind, build_grid, build_randomized
from .phase import PhaseSchedule, ShiftKind, build_laddered
from .phase import build_randomized as build_random_shifts
from .policy import Direction, PolicyParams, SurfPlan, select_next
from .popularity import PopularityModel, SwitchingModel, build_zipf, sample_watch

log = logging.getLogger(__name__)

CRITICAL_WAIT_MS = 250.0

# spawn-key tags separating the per-episode streams from the pool streams
_EPISODE_STREAM = 0
_CLIENT_POOL_STREAM = 1
_SHIFT_POOL_STREAM = 2


class ClientOrdering(str, Enum):
    SAME = "same"
    RANDOMIZED = "randomized"


class DwellKind(str, Enum):
    ZERO = "zero"
    FIXED = "fixed"
    UNIFORM_GOP = "uniform-gop"


@dataclass(frozen=True)
class DwellModel:
    """Time between a key frame arriving and the next press."""

    kind: DwellKind = DwellKind.UNIFORM_GOP
    ms: float = 0.0

    @classmethod
    def parse(cls, text) -> "DwellModel":
        if isinstance(text, DwellModel):
            return text
        text = str(text).strip()
        if text.startswith("fixed"):
            arg = text[len("fixed"):].strip("():= ")
            try:
                ms = float(arg)
            except ValueError:
                raise ParameterError(f"bad fixed dwell {text!r}; use fixed:<ms>") from None
            if not math.isfinite(ms) or ms < 0:
                raise ParameterError("fixed dwell must be a finite nonnegative duration")
            return cls(DwellKind.FIXED, ms)
        try:
            return cls(DwellKind(text))
        except ValueError:
            raise ParameterError(
                f"unknown dwell model {text!r}; use zero, fixed:<ms> or uniform-gop") from None

    def __str__(self):
        if self.kind is DwellKind.FIXED:
            return f"fixed:{self.ms:g}"
        return self.kind.value


@dataclass(frozen=True)
class ScenarioConfig:
    session_count: int = 100
    shape: float = 1.0
    gop_ms: float = 1000.0
    separation: int = 4
    max_wait: int = 4
    ordering: OrderingKind = OrderingKind.ONE_STEP
    client_ordering: ClientOrdering = ClientOrdering.SAME
    shifts: ShiftKind = ShiftKind.LADDERED
    dwell: DwellModel = field(default_factory=DwellModel)
    event_budget: int = 1_000_000
    master_seed: int = 0
    # number of distinct randomized client grids / shift assignments episodes cycle through
    pool_size: int = 64

    def __post_init__(self):
        check_int(self.session_count, "session_count", minimum=2)
        check_real(self.shape, "shape", minimum=0.0)
        check_real(self.gop_ms, "gop_ms", minimum=0.0, strict=True)
        check_int(self.max_wait, "max_wait", minimum=1)
        check_int(self.event_budget, "event_budget", minimum=1)
        check_int(self.pool_size, "pool_size", minimum=1)
        seed = check_int(self.master_seed, "master_seed", minimum=0)
        if seed >= 2 ** 64:
            raise ParameterError("master_seed must fit in 64 bits")
        try:
            object.__setattr__(self, "ordering", OrderingKind(self.ordering))
            object.__setattr__(self, "client_ordering", ClientOrdering(self.client_ordering))
            object.__setattr__(self, "shifts", ShiftKind(self.shifts))
        except ValueError as exc:
            raise ParameterError(str(exc)) from None
        object.__setattr__(self, "dwell", DwellModel.parse(self.dwell))
        if self.ordering is OrderingKind.RANDOMIZED:
            raise ParameterError("the network grid must be identity, one-step or two-step")
        if self.shifts is ShiftKind.LADDERED:
            check_int(self.separation, "separation", minimum=2)
        else:
            check_int(self.separation, "separation", minimum=1)

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        out = asdict(self)
        for key, value in out.items():
            if isinstance(value, Enum):
                out[key] = value.value
        out["dwell"] = str(self.dwell)
        return out


@dataclass
class EpisodeResult:
    start_rank: int
    target_rank: int
    direction: Direction
    target_index: int  # original index of the target, i.e. d_min on the client grid
    switch_count: int
    per_switch_wait_ms: list[float]
    accumulative_wait_ms: float
    # (request n, original index r, network slot, wait ms, press time ms)
    trace: list[tuple[int, int, int, float, float]] | None = None


def episode_rng(master_seed: int, episode_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(_EPISODE_STREAM, episode_index)))


def _pool_rng(master_seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(tag,)))


def surf_order(network: ChannelGrid, client: ChannelGrid, start_rank: int,
               direction: Direction) -> list[int]:
    """Network slots of the channels met surfing ``client`` from ``start_rank``."""
    n = client.session_count
    step = 1 if direction is Direction.UP else -1
    client_slots = (client.position(start_rank) + step * np.arange(1, n)) % n
    return network.place[client.place_inv[client_slots]].tolist()


def run_episode(config: ScenarioConfig, network: ChannelGrid, client: ChannelGrid,
                schedule: PhaseSchedule, popularity: PopularityModel,
                switching: SwitchingModel, rng: np.random.Generator,
                trace: bool = False) -> EpisodeResult:
    """Simulate one surfing period until the target channel is displayed.

    Draw order per episode: start, target, first-press time, then one dwell
    draw between consecutive presses.
    """
    u_start, u_target, u_time = rng.random(3).tolist()
    start = sample_watch(popularity, u_start)
    target = switching.sample_destination(start, u_target)
    n = client.session_count
    ps, pt = client.place[start - 1], client.place[target - 1]
    up = int((pt - ps) % n)
    down = n - up
    direction = Direction.UP if up <= down else Direction.DOWN
    target_index = min(up, down)

    plan = SurfPlan(surf_order(network, client, start, direction), direction)
    params = PolicyParams(config.max_wait, config.separation)
    gop = config.gop_ms
    dwell = config.dwell
    now = u_time * gop
    waits = []
    steps = [] if trace else None
    while True:
        r, wait = select_next(plan, params, schedule, now)
        waits.append(wait)
        if steps is not None:
            steps.append((len(waits), r, plan.order[r - 1], wait, now))
        if r == target_index:
            break
        now += wait
        if dwell.kind is DwellKind.UNIFORM_GOP:
            now += rng.random() * gop
        elif dwell.kind is DwellKind.FIXED:
            now += dwell.ms
    return EpisodeResult(start, target, direction, target_index, len(waits), waits,
                         math.fsum(waits), steps)


class Scenario:
    """All immutable inputs an episode needs, built once per config."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        n = config.session_count
        self.popularity = build_zipf(n, config.shape)
        self.switching = SwitchingModel(self.popularity)
        self.network = build_grid(config.ordering, n)
        if config.shifts is ShiftKind.LADDERED:
            self.schedules = [build_laddered(config.gop_ms, config.separation, n)]
        else:
            rng = _pool_rng(config.master_seed, _SHIFT_POOL_STREAM)
            self.schedules = [build_random_shifts(config.gop_ms, n, rng.random(n))
                              for _ in range(config.pool_size)]
        if config.client_ordering is ClientOrdering.SAME:
            self.clients = [self.network]
        else:
            rng = _pool_rng(config.master_seed, _CLIENT_POOL_STREAM)
            self.clients = [build_randomized(self.popularity, rng.random(n))
                            for _ in range(config.pool_size)]

    def episode(self, index: int, trace: bool = False) -> EpisodeResult:
        return run_episode(self.config, self.network,
                           self.clients[index % len(self.clients)],
                           self.schedules[index % len(self.schedules)],
                           self.popularity, self.switching,
                           episode_rng(self.config.master_seed, index), trace=trace)

    def run_block(self, first: int, count: int) -> "_Block":
        counts = np.empty(count, dtype=np.int64)
        waits: list[float] = []
        for k in range(count):
            result = self.episode(first + k)
            counts[k] = result.switch_count
            waits.extend(result.per_switch_wait_ms)
        return _Block(first, counts, np.asarray(waits, dtype=float))


@dataclass
class _Block:
    first: int
    counts: np.ndarray
    waits: np.ndarray


@dataclass(eq=False)
class AggregateStats:
    """Per-switch waits and per-episode switch counts, kept raw.

    ``waits`` is the concatenation of each episode's waits in episode order and
    ``switch_counts[k]`` says how many of them belong to episode ``k``.
    """

    waits: np.ndarray
    switch_counts: np.ndarray
    gop_ms: float
    bin_ms: float = 10.0

    def __post_init__(self):
        self.waits = np.asarray(self.waits, dtype=float)
        self.switch_counts = np.asarray(self.switch_counts, dtype=np.int64)
        if int(self.switch_counts.sum()) != self.waits.shape[0]:
            raise ParameterError("switch counts do not add up to the number of waits")
        check_real(self.bin_ms, "bin_ms", minimum=0.0, strict=True)

    def merge(self, other: "AggregateStats") -> "AggregateStats":
        """Append ``other``'s episodes after this one's."""
        if other.gop_ms != self.gop_ms:
            raise ParameterError("cannot merge statistics with different GOP durations")
        return AggregateStats(np.concatenate([self.waits, other.waits]),
                              np.concatenate([self.switch_counts, other.switch_counts]),
                              self.gop_ms, self.bin_ms)

    @property
    def event_count(self) -> int:
        return int(self.waits.shape[0])

    @property
    def episode_count(self) -> int:
        return int(self.switch_counts.shape[0])

    @cached_property
    def _episode_bounds(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.switch_counts)])

    @cached_property
    def accumulative_waits(self) -> np.ndarray:
        return np.add.reduceat(self.waits, self._episode_bounds[:-1]) \
            if self.episode_count else np.empty(0)

    @property
    def target_waits(self) -> np.ndarray:
        """Wait of the final press of each episode, i.e. the one landing on the target."""
        return self.waits[self._episode_bounds[1:] - 1]

    @property
    def mean_wait(self) -> float:
        return float(np.mean(self.waits))

    @property
    def wait_sem(self) -> float:
        return float(np.std(self.waits, ddof=1) / math.sqrt(self.event_count))

    @property
    def median_wait(self) -> float:
        return float(np.median(self.waits))

    @property
    def p95_wait(self) -> float:
        return float(np.percentile(self.waits, 95))

    @property
    def fraction_within_critical(self) -> float:
        return float(np.mean(self.waits <= CRITICAL_WAIT_MS))

    def fraction_within(self, threshold_ms: float) -> float:
        return float(np.mean(self.waits <= threshold_ms))

    @property
    def mean_switches(self) -> float:
        return float(np.mean(self.switch_counts))

    @property
    def switches_sem(self) -> float:
        return float(np.std(self.switch_counts, ddof=1) / math.sqrt(self.episode_count))

    @property
    def mean_accumulative(self) -> float:
        return float(np.mean(self.accumulative_waits))

    @property
    def mean_target_wait(self) -> float:
        return float(np.mean(self.target_waits))

    def histogram(self, bin_ms: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Counts per ``[k * bin, (k + 1) * bin)`` bin over ``[0, gop)``; returns (edges, counts)."""
        width = check_real(self.bin_ms if bin_ms is None else bin_ms, "bin_ms",
                           minimum=0.0, strict=True)
        nbins = max(1, math.ceil(self.gop_ms / width - 1e-9))
        edges = np.minimum(np.arange(nbins + 1) * width, self.gop_ms)
        idx = np.minimum((self.waits // width).astype(np.int64), nbins - 1)
        return edges, np.bincount(idx, minlength=nbins)


_WORKER_SCENARIO: Scenario | None = None


def _init_worker(config: ScenarioConfig) -> None:
    global _WORKER_SCENARIO
    _WORKER_SCENARIO = Scenario(config)


def _worker_block(first: int, count: int) -> _Block:
    return _WORKER_SCENARIO.run_block(first, count)


def _collect(blocks: list[_Block], budget: int, gop_ms: float, bin_ms: float) -> AggregateStats:
    counts = np.concatenate([b.counts for b in blocks])
    waits = np.concatenate([b.waits for b in blocks])
    cum = np.cumsum(counts)
    # the episode that reaches the budget runs to completion
    last = int(np.searchsorted(cum, budget, side="left"))
    counts = counts[: last + 1]
    return AggregateStats(waits[: int(cum[last])], counts, gop_ms, bin_ms)


def run_scenario(config: ScenarioConfig, threads: int = 1, block_size: int = 1024,
                 bin_ms: float = 10.0) -> AggregateStats:
    """Run episodes until ``config.event_budget`` switch events have been recorded."""
    threads = check_int(threads, "threads", minimum=1)
    block_size = check_int(block_size, "block_size", minimum=1)
    check_real(bin_ms, "bin_ms", minimum=0.0, strict=True)
    budget = config.event_budget
    blocks: list[_Block] = []
    total = 0
    next_first = 0
    if threads == 1:
        scenario = Scenario(config)
        while total < budget:
            block = scenario.run_block(next_first, block_size)
            next_first += block_size
            blocks.append(block)
            total += int(block.counts.sum())
    else:
        with ProcessPoolExecutor(threads, initializer=_init_worker,
                                 initargs=(config,)) as pool:
            while total < budget:
                futures = [pool.submit(_worker_block, next_first + k * block_size, block_size)
                           for k in range(threads)]
                next_first += threads * block_size
                for fut in futures:
                    block = fut.result()
                    if total < budget:
                        blocks.append(block)
                        total += int(block.counts.sum())
    log.debug("scenario %s: %d events in %d blocks", config, total, len(blocks))
    return _collect(blocks, budget, config.gop_ms, bin_ms)


def relative_change(value: float, reference: float) -> float:
    """``100 * (value - reference) / reference``."""
    if reference == 0:
        raise UndefinedRatioError("reference value is zero")
    return 100.0 * (value - reference) / reference


def improvement_vs_baseline(stats: AggregateStats, baseline: AggregateStats,
                            metric: str = "wait") -> float:
    """Percent reduction of the mean per-switch (or accumulative) wait against ``baseline``."""
    if metric == "wait":
        ours, ref = stats.mean_wait, baseline.mean_wait
    elif metric == "accumulative":
        ours, ref = stats.mean_accumulative, baseline.mean_accumulative
    else:
        raise ParameterError(f"unknown metric {metric!r}")
    if ref == 0:
        raise UndefinedRatioError("baseline mean is zero")
    return 100.0 * (ref - ours) / ref


def switch_overhead(stats: AggregateStats, baseline: AggregateStats) -> float:
    """Percent increase of the mean switch count over ``baseline``."""
    return relative_change(stats.mean_switches, baseline.mean_switches)
