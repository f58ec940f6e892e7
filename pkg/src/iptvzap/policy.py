"""Wait-bounded dynamic reordering of the channels met while surfing.

The channels ahead of the viewer, in the direction of travel, form the
original order ``o_1, o_2, ...``. At each press the policy may pick any
unvisited channel whose original index lies in the window
``[r_min, r_min + max_wait - 1]``, where ``r_min`` is the first unvisited
index. It picks the one whose next key frame arrives soonest. No channel is
therefore shown more than ``max_wait - 1`` presses earlier or later than in
the original order, and ``max_wait = 1`` is plain sequential surfing.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from ._validation import check_int
from .exceptions import ParameterError
from .phase import PhaseSchedule


class Direction(str, Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class PolicyParams:
    max_wait: int
    separation: int | None = None

    def __post_init__(self):
        check_int(self.max_wait, "max_wait", minimum=1)


class SurfPlan:
    """Per-episode selection state.

    ``order`` holds schedule slots in original switching order; original
    indices are 1-based, so ``order[r - 1]`` is the slot of ``o_r``.
    """

    __slots__ = ("order", "direction", "visited", "r_min", "selections")

    def __init__(self, order: Sequence[int], direction: Direction = Direction.UP):
        if len(order) == 0:
            raise ParameterError("a surf plan needs at least one channel")
        self.order = list(order)
        self.direction = Direction(direction)
        self.visited = [False] * (len(self.order) + 2)
        self.r_min = 1
        self.selections = 0

    def __len__(self):
        return len(self.order)

    @property
    def visited_indices(self) -> set[int]:
        return {r for r in range(1, len(self.order) + 1) if self.visited[r]}

    def exhausted(self) -> bool:
        return self.r_min > len(self.order)

    def mark(self, r: int) -> None:
        if not 1 <= r <= len(self.order) or self.visited[r]:
            raise ParameterError(f"original index {r} is not selectable")
        self.visited[r] = True
        self.selections += 1
        visited = self.visited
        r_min = self.r_min
        while visited[r_min]:
            r_min += 1
        self.r_min = r_min

    @classmethod
    def with_visited(cls, order: Sequence[int], visited: Iterable[int]) -> "SurfPlan":
        plan = cls(order)
        for r in sorted(visited):
            plan.visited[r] = True
            plan.selections += 1
        while plan.visited[plan.r_min]:
            plan.r_min += 1
        return plan


def candidate_window(plan: SurfPlan, params: PolicyParams) -> list[int]:
    """Unvisited original indices in ``[r_min, r_min + max_wait - 1]``."""
    if plan.exhausted():
        raise ParameterError("surf plan has no unvisited channels")
    hi = min(plan.r_min + params.max_wait - 1, len(plan.order))
    return [r for r in range(plan.r_min, hi + 1) if not plan.visited[r]]


def select_next(plan: SurfPlan, params: PolicyParams, schedule: PhaseSchedule,
                now_ms: float) -> tuple[int, float]:
    """Pick the window member with the shortest key-frame wait and mark it visited.

    Ties go to the smaller original index, so a channel sharing its phase with
    an earlier one never overtakes it.
    """
    r_min = plan.r_min
    order = plan.order
    if r_min > len(order):
        raise ParameterError("surf plan has no unvisited channels")
    hi = min(r_min + params.max_wait - 1, len(order))
    shifts = schedule.shift_list
    gop = schedule.gop_ms
    phase_now = now_ms % gop
    visited = plan.visited
    best = r_min
    best_wait = gop
    for r in range(r_min, hi + 1):
        if visited[r]:
            continue
        d = shifts[order[r - 1]] - phase_now
        if d < 0.0:
            d += gop
            if d >= gop:
                d = 0.0
        if d < best_wait:
            best, best_wait = r, d
    plan.mark(best)
    return best, best_wait


def deferral_bound_check(trace: Iterable[tuple[int, int]], max_wait: int) -> bool:
    """True iff every ``(request n, original index r)`` pair has ``|n - r| <= max_wait - 1``."""
    limit = check_int(max_wait, "max_wait", minimum=1) - 1
    return all(abs(n - r) <= limit for n, r in trace)
