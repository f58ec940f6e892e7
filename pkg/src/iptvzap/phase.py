"""Key-frame start phases per circular slot, and the wait for the next key frame."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from ._validation import check_int, check_real, check_unit_vector
from .exceptions import ParameterError


class ShiftKind(str, Enum):
    LADDERED = "laddered"
    RANDOMIZED = "randomized"


@dataclass(frozen=True, eq=False)
class PhaseSchedule:
    gop_ms: float
    shift_ms: np.ndarray  # indexed by slot on the network grid
    kind: ShiftKind
    separation: int | None = None

    @property
    def session_count(self) -> int:
        return int(self.shift_ms.shape[0])

    @property
    def step_ms(self) -> float | None:
        """Shift between adjacent slots for laddered schedules."""
        if self.separation is None:
            return None
        return self.gop_ms / self.separation

    @cached_property
    def shift_list(self) -> list[float]:
        return [float(x) for x in self.shift_ms]

    def wait(self, position: int, now_ms: float) -> float:
        return wait_until_keyframe(self, position, now_ms)


def build_laddered(gop_ms: float, separation: int, session_count: int) -> PhaseSchedule:
    """Slot ``k`` starts its GOP at ``(k mod S) * gop / S``.

    Computing from ``k mod S`` keeps slots ``k`` and ``k + S`` bit-identical.
    """
    gop = check_real(gop_ms, "gop_ms", minimum=0.0, strict=True)
    sep = check_int(separation, "separation", minimum=2)
    n = check_int(session_count, "session_count", minimum=1)
    shifts = (np.arange(n) % sep) * gop / sep
    shifts.setflags(write=False)
    return PhaseSchedule(gop, shifts, ShiftKind.LADDERED, sep)


def build_randomized(gop_ms: float, session_count: int, uniforms) -> PhaseSchedule:
    gop = check_real(gop_ms, "gop_ms", minimum=0.0, strict=True)
    n = check_int(session_count, "session_count", minimum=1)
    shifts = check_unit_vector(uniforms, "uniforms", n) * gop
    shifts.setflags(write=False)
    return PhaseSchedule(gop, shifts, ShiftKind.RANDOMIZED, None)


def keyframe_wait(shift: float, now_ms: float, gop_ms: float) -> float:
    """Time from ``now_ms`` until the next GOP start at phase ``shift``; in [0, gop)."""
    d = shift - now_ms % gop_ms
    if d < 0.0:
        d += gop_ms
        if d >= gop_ms:
            # d was a rounding-level negative
            d = 0.0
    return d


def wait_until_keyframe(schedule: PhaseSchedule, position: int, now_ms: float) -> float:
    if not 0 <= position < schedule.session_count:
        raise ParameterError(f"position {position} out of range")
    return keyframe_wait(float(schedule.shift_ms[position]), now_ms, schedule.gop_ms)
