"""Zipf watch distribution and the switching model derived from it.

Ranks are 1-based in the public API (rank 1 is the most popular session);
arrays are 0-based, so ``watch_prob[r - 1]`` is the probability of rank ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._validation import check_int, check_rank, check_real
from .exceptions import ParameterError


@dataclass(frozen=True)
class PopularityModel:
    session_count: int
    shape: float
    watch_prob: np.ndarray
    watch_cdf: np.ndarray

    def prob(self, rank: int) -> float:
        return float(self.watch_prob[check_rank(rank, self.session_count) - 1])


def build_zipf(session_count: int, shape: float = 1.0) -> PopularityModel:
    """Zipf popularity over ``session_count`` ranked sessions.

    ``pi(i) = i**-shape / sum_n n**-shape``. ``shape=0`` gives the uniform
    distribution exactly.
    """
    n = check_int(session_count, "session_count", minimum=1)
    s = check_real(shape, "shape", minimum=0.0)
    if s == 0.0:
        prob = np.full(n, 1.0 / n)
    else:
        weights = 1.0 / np.arange(1, n + 1, dtype=float) ** s
        prob = weights / weights.sum()
    cdf = np.cumsum(prob)
    prob.setflags(write=False)
    cdf.setflags(write=False)
    return PopularityModel(n, s, prob, cdf)


def sample_watch(model: PopularityModel, uniform: float) -> int:
    """Inverse-CDF draw: the smallest rank whose CDF strictly exceeds ``uniform``."""
    idx = int(np.searchsorted(model.watch_cdf, uniform, side="right"))
    # the last CDF entry can round just below 1
    return min(idx, model.session_count - 1) + 1


class SwitchingKind(str, Enum):
    DESTINATION_PROPORTIONAL = "destination-proportional"


@dataclass(frozen=True)
class SwitchingModel:
    """Probability ``p[i, j]`` of switching from rank ``i`` to rank ``j``.

    The destination-proportional kind renormalises the watch distribution with
    the source removed: ``p[i, j] = pi(j) / (1 - pi(i))`` and ``p[i, i] = 0``.
    """

    underlying: PopularityModel
    kind: SwitchingKind = SwitchingKind.DESTINATION_PROPORTIONAL

    def matrix(self) -> np.ndarray:
        pi = self.underlying.watch_prob
        if pi.shape[0] < 2:
            raise ParameterError("switching needs at least two sessions")
        p = pi[None, :] / (1.0 - pi[:, None])
        np.fill_diagonal(p, 0.0)
        return p

    def sample_destination(self, source: int, uniform: float) -> int:
        """Inverse-CDF draw of a destination rank for ``source`` from one uniform."""
        model = self.underlying
        n = model.session_count
        if n < 2:
            raise ParameterError("switching needs at least two sessions")
        src = check_rank(source, n, "source") - 1
        cdf = model.watch_cdf
        p_src = model.watch_prob[src]
        below = cdf[src - 1] if src > 0 else 0.0
        v = uniform * (1.0 - p_src)
        if v < below:
            idx = int(np.searchsorted(cdf, v, side="right"))
        else:
            # skip the source's own mass
            idx = int(np.searchsorted(cdf, v + p_src, side="right"))
            idx = max(idx, src + 1)
        if idx >= n:
            idx = n - 1 if src != n - 1 else n - 2
        return idx + 1


def switch_prob(model: SwitchingModel, source: int, dest: int) -> float:
    n = model.underlying.session_count
    i = check_rank(source, n, "source")
    j = check_rank(dest, n, "dest")
    if i == j:
        raise ParameterError("source and dest must differ")
    pi = model.underlying.watch_prob
    return float(pi[j - 1] / (1.0 - pi[i - 1]))
