"""Budgeted per-color pruning.

Keeps a subset U of the points such that any two kept points of the same color
are at least gamma apart, while every dropped point lies within gamma of a
kept point of its color (unless the budget ran out first).
"""
import enum
import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from fairmmd.core import Dataset, Indices

_log = logging.getLogger(__name__)


class PruneMode(enum.Enum):
    ARBITRARY = "arbitrary"
    FURTHEST = "furthest"


@dataclass(frozen=True)
class PruneParams:
    gamma: float
    budget: int
    mode: PruneMode = PruneMode.ARBITRARY

    def __post_init__(self):
        assert self.gamma >= 0, f"negative gamma: {self.gamma}"
        assert self.budget >= 1, f"budget must be positive: {self.budget}"


def prune(
    dataset: Dataset, params: PruneParams, candidates: ArrayLike | None = None
) -> Indices:
    """Return kept indices in ascending order.

    candidates restricts the input to a subset of the dataset.
    """
    if params.mode is PruneMode.FURTHEST:
        return prune_furthest(dataset, params, candidates)
    pool = _candidates(dataset, candidates)
    kept: list[int] = []
    for color in range(dataset.m):
        members = pool[dataset.colors[pool] == color]
        marked = np.zeros(len(members), dtype=bool)
        selected = 0
        # guard |U_i| <= b as written admits b + 1 picks
        while not marked.all() and selected <= params.budget:
            pos = int(np.argmin(marked))  # lowest unmarked index
            v = int(members[pos])
            marked |= dataset.distances(v, members) < params.gamma
            marked[pos] = True
            kept.append(v)
            selected += 1
    _log.debug(f"prune(gamma={params.gamma:.6g}, b={params.budget}): {len(kept)}")
    return np.sort(np.asarray(kept, dtype=np.intp))


def prune_furthest(
    dataset: Dataset, params: PruneParams, candidates: ArrayLike | None = None
) -> Indices:
    """Globally greedy variant: always add the eligible point furthest from U.

    A point is eligible while unmarked and its color holds fewer than budget
    points. The first pick is the lowest eligible index.
    """
    pool = _candidates(dataset, candidates)
    colors = dataset.colors[pool]
    marked = np.zeros(len(pool), dtype=bool)
    nearest = np.full(len(pool), np.inf)
    held = np.zeros(dataset.m, dtype=np.intp)
    kept: list[int] = []
    while True:
        eligible = ~marked & (held[colors] < params.budget)
        if not eligible.any():
            break
        pos = int(np.argmax(np.where(eligible, nearest, -np.inf)))
        v = int(pool[pos])
        dist = dataset.distances(v, pool)
        marked |= (colors == colors[pos]) & (dist < params.gamma)
        marked[pos] = True
        np.minimum(nearest, dist, out=nearest)
        held[colors[pos]] += 1
        kept.append(v)
    _log.debug(f"prune_furthest(gamma={params.gamma:.6g}): {len(kept)}")
    return np.sort(np.asarray(kept, dtype=np.intp))


def _candidates(dataset: Dataset, candidates: ArrayLike | None) -> Indices:
    if candidates is None:
        return np.arange(dataset.n, dtype=np.intp)
    return np.sort(np.asarray(candidates, dtype=np.intp))
