"""Circular channel placements and directional distances on them.

A grid maps each popularity rank to one of ``N`` slots on a circle. Slot 0
holds rank 1 for the interleaved constructions, and "up" means increasing slot
index (clockwise).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._validation import check_int, check_rank, check_unit_vector
from .exceptions import ParameterError
from .popularity import PopularityModel


class OrderingKind(str, Enum):
    IDENTITY = "identity"
    ONE_STEP = "one-step"
    TWO_STEP = "two-step"
    RANDOMIZED = "randomized"


@dataclass(frozen=True, eq=False)
class ChannelGrid:
    place: np.ndarray  # place[rank - 1] -> slot
    kind: OrderingKind
    place_inv: np.ndarray = field(init=False, repr=False)  # place_inv[slot] -> rank - 1

    def __post_init__(self):
        place = np.asarray(self.place, dtype=np.int64)
        n = place.shape[0]
        if n < 1 or not np.array_equal(np.sort(place), np.arange(n)):
            raise ParameterError("placement must be a permutation of 0..N-1")
        inv = np.empty(n, dtype=np.int64)
        inv[place] = np.arange(n)
        place.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "place", place)
        object.__setattr__(self, "place_inv", inv)
        object.__setattr__(self, "kind", OrderingKind(self.kind))

    @property
    def session_count(self) -> int:
        return int(self.place.shape[0])

    def position(self, rank: int) -> int:
        return int(self.place[check_rank(rank, self.session_count) - 1])

    def rank_at(self, position: int) -> int:
        return int(self.place_inv[position]) + 1

    def ranks_by_position(self) -> list[int]:
        return [int(r) + 1 for r in self.place_inv]

    def __eq__(self, other):
        if not isinstance(other, ChannelGrid):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.place, other.place)

    def __hash__(self):
        return hash((self.kind, self.place.tobytes()))

    def to_csv_line(self) -> str:
        """Slot-ordered rank list, e.g. ``1,2,4,6,5,3``."""
        return ",".join(str(r) for r in self.ranks_by_position())

    @classmethod
    def from_csv_line(cls, line: str, kind=OrderingKind.IDENTITY) -> "ChannelGrid":
        ranks = [int(tok) for tok in line.strip().split(",") if tok.strip()]
        return from_ranks(ranks, kind)


def from_ranks(ranks_by_position, kind=OrderingKind.IDENTITY) -> ChannelGrid:
    ranks = np.asarray(ranks_by_position, dtype=np.int64)
    n = ranks.shape[0]
    if n < 1 or not np.array_equal(np.sort(ranks), np.arange(1, n + 1)):
        raise ParameterError("rank list must be a permutation of 1..N")
    place = np.empty(n, dtype=np.int64)
    place[ranks - 1] = np.arange(n)
    return ChannelGrid(place, kind)


def build_identity(session_count: int) -> ChannelGrid:
    n = check_int(session_count, "session_count", minimum=1)
    return ChannelGrid(np.arange(n), OrderingKind.IDENTITY)


def build_one_step(session_count: int) -> ChannelGrid:
    """Even ranks go clockwise from rank 1, odd ranks counterclockwise."""
    n = check_int(session_count, "session_count", minimum=1)
    place = np.empty(n, dtype=np.int64)
    place[0] = 0
    up, down = 1, n - 1
    for rank in range(2, n + 1):
        if rank % 2 == 0:
            place[rank - 1] = up
            up += 1
        else:
            place[rank - 1] = down
            down -= 1
    return ChannelGrid(place, OrderingKind.ONE_STEP)


def build_two_step(session_count: int, lead_pair: bool = True) -> ChannelGrid:
    """Assign ranks in pairs, alternating between clockwise and counterclockwise.

    With ``lead_pair`` (the default) ranks 1 and 2 open the circle clockwise at
    slots 0 and 1, then ranks 3, 4 go counterclockwise from slot N-1, ranks 5, 6
    clockwise, and so on. Without it rank 1 sits alone at slot 0 and the pairs
    start at rank 2 (2, 3 clockwise; 4, 5 counterclockwise; ...).
    """
    n = check_int(session_count, "session_count", minimum=1)
    place = np.empty(n, dtype=np.int64)
    if lead_pair:
        up, down, rank = 0, n - 1, 1
    else:
        place[0] = 0
        up, down, rank = 1, n - 1, 2
    clockwise = True
    while rank <= n:
        for _ in range(2):
            if rank > n:
                break
            if clockwise:
                place[rank - 1] = up
                up += 1
            else:
                place[rank - 1] = down
                down -= 1
            rank += 1
        clockwise = not clockwise
    return ChannelGrid(place, OrderingKind.TWO_STEP)


def build_randomized(base: PopularityModel, uniforms) -> ChannelGrid:
    """Pseudo-randomized client placement driven by one uniform per slot.

    Slots are filled in order 0, 1, ..., N-1. At each step the still-unplaced
    sessions (kept in popularity order) are renormalised, and the session
    picked is the first whose cumulative probability reaches the step's
    uniform. Early slots therefore lean towards popular sessions.
    """
    n = base.session_count
    u = check_unit_vector(uniforms, "uniforms", n)
    remaining = list(range(n))
    weights = list(base.watch_prob)
    place = np.empty(n, dtype=np.int64)
    for slot in range(n):
        total = 0.0
        for idx in remaining:
            total += weights[idx]
        threshold = u[slot] * total
        acc = 0.0
        pick = len(remaining) - 1
        for j, idx in enumerate(remaining):
            acc += weights[idx]
            if threshold <= acc:
                pick = j
                break
        place[remaining.pop(pick)] = slot
    return ChannelGrid(place, OrderingKind.RANDOMIZED)


def build_grid(kind, session_count: int) -> ChannelGrid:
    """Deterministic constructors by kind; randomized grids need :func:`build_randomized`."""
    kind = OrderingKind(kind)
    if kind is OrderingKind.IDENTITY:
        return build_identity(session_count)
    if kind is OrderingKind.ONE_STEP:
        return build_one_step(session_count)
    if kind is OrderingKind.TWO_STEP:
        return build_two_step(session_count)
    raise ParameterError("randomized grids are built from a popularity model and uniforms")


def slot_distances(n: int, from_slot: int, to_slot: int) -> tuple[int, int, int]:
    up = (to_slot - from_slot) % n
    down = (from_slot - to_slot) % n
    return up, down, min(up, down)


def distances(grid: ChannelGrid, from_rank: int, to_rank: int) -> tuple[int, int, int]:
    """``(d_up, d_dn, d_min)`` in presses between two ranks on ``grid``."""
    if from_rank == to_rank:
        raise ParameterError("from and to must be different sessions")
    return slot_distances(grid.session_count, grid.position(from_rank), grid.position(to_rank))


def min_distance_matrix(grid: ChannelGrid) -> np.ndarray:
    """``d_min`` for every ordered rank pair (zero on the diagonal)."""
    n = grid.session_count
    up = (grid.place[None, :] - grid.place[:, None]) % n
    return np.minimum(up, n - up)


def position_probabilities(base: PopularityModel, grid: ChannelGrid) -> np.ndarray:
    """Watch probability of whichever session occupies each slot."""
    if base.session_count != grid.session_count:
        raise ParameterError("popularity model and grid disagree on N")
    return np.asarray(base.watch_prob)[grid.place_inv]


def remap_probabilities(base: PopularityModel, original: ChannelGrid,
                        randomized: ChannelGrid) -> np.ndarray:
    """Slot-indexed watch probabilities of ``randomized`` on the shared circle.

    Both grids live on the same ``N`` slots; the result can be compared slot by
    slot with ``position_probabilities(base, original)``.
    """
    if original.session_count != randomized.session_count:
        raise ParameterError("grids disagree on N")
    return position_probabilities(base, randomized)
