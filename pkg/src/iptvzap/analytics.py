"""Exact expected switch counts and distances between slot distributions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError
from .grid import (ChannelGrid, OrderingKind, build_grid, build_one_step, build_randomized,
                   min_distance_matrix, position_probabilities)
from .popularity import SwitchingModel, build_zipf

# Reference expected switch counts at s = 1, keyed by (ordering, N).
PUBLISHED_SWITCH_COUNTS = {
    ("one-step", 100): 15.4497, ("one-step", 200): 27.9877, ("one-step", 300): 39.7763,
    ("one-step", 400): 51.1233, ("one-step", 500): 62.1622,
    ("two-step", 100): 15.4541, ("two-step", 200): 27.9912, ("two-step", 300): 39.7794,
    ("two-step", 400): 51.1262, ("two-step", 500): 62.1649,
}


@dataclass(frozen=True)
class SwitchCountReport:
    grid_label: str
    session_count: int
    shape: float
    expected_switches: float


def expected_switches(grid: ChannelGrid, switching: SwitchingModel) -> float:
    """Mean presses per surfing period when the viewer always takes the short way round.

    ``sum_i pi(i) sum_{j != i} p[i, j] * d_min(i, j)``.
    """
    n = grid.session_count
    if n < 2:
        raise ParameterError("expected switch count needs N >= 2")
    if switching.underlying.session_count != n:
        raise ParameterError("grid and switching model disagree on N")
    pi = switching.underlying.watch_prob
    weighted = pi[:, None] * switching.matrix()
    return float(np.sum(weighted * min_distance_matrix(grid)))


def switch_count_report(ordering, session_count: int, shape: float = 1.0) -> SwitchCountReport:
    grid = build_grid(ordering, session_count)
    model = SwitchingModel(build_zipf(session_count, shape))
    return SwitchCountReport(OrderingKind(ordering).value, session_count, shape,
                             expected_switches(grid, model))


def distribution_distance(a, b) -> float:
    """Euclidean distance between two slot-indexed probability vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ParameterError(f"vectors must have equal length, got {a.shape} and {b.shape}")
    return float(np.linalg.norm(a - b))


def randomized_distances(session_count: int, draws: int, rng: np.random.Generator,
                         shape: float = 1.0) -> np.ndarray:
    """Distances between the one-step slot distribution and ``draws`` randomized client grids."""
    base = build_zipf(session_count, shape)
    reference = position_probabilities(base, build_one_step(session_count))
    out = np.empty(draws)
    for k in range(draws):
        client = build_randomized(base, rng.random(session_count))
        out[k] = distribution_distance(reference, position_probabilities(base, client))
    return out
