from __future__ import annotations

import numbers

import numpy as np

from .exceptions import ParameterError


def check_int(value, name: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_real(value, name: str, minimum: float | None = None, strict: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ParameterError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value}")
    if minimum is not None:
        if strict and value <= minimum:
            raise ParameterError(f"{name} must be > {minimum}, got {value}")
        if not strict and value < minimum:
            raise ParameterError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_unit_vector(values, name: str, length: int) -> np.ndarray:
    """Return ``values`` as a float array of uniforms in [0, 1) with the given length."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise ParameterError(f"{name} must have {length} entries, got shape {arr.shape}")
    if np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise ParameterError(f"{name} entries must lie in [0, 1)")
    return arr


def check_rank(rank, session_count: int, name: str = "rank") -> int:
    rank = check_int(rank, name, minimum=1)
    if rank > session_count:
        raise ParameterError(f"{name} must be <= {session_count}, got {rank}")
    return rank
