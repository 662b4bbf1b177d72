"""Greedy next-furthest-point selection (Gonzalez).

A 1/2-approximation for max-min diversification without fairness constraints.
"""
import logging

import numpy as np
from numpy.typing import ArrayLike

from fairmmd.core import Dataset, Indices

_log = logging.getLogger(__name__)


def gmm(
    dataset: Dataset, k: int, seed_index: int = 0, candidates: ArrayLike | None = None
) -> Indices:
    """Start at seed_index and repeatedly add the point furthest from the chosen."""
    pool = (
        np.arange(dataset.n, dtype=np.intp)
        if candidates is None
        else np.asarray(candidates, dtype=np.intp)
    )
    if k > len(pool):
        msg = f"k={k} exceeds the {len(pool)} candidate points"
        raise ValueError(msg)
    assert k >= 1, k
    assert seed_index in pool, seed_index
    chosen = [int(seed_index)]
    nearest = dataset.distances(seed_index, pool)
    nearest[pool == seed_index] = -np.inf
    while len(chosen) < k:
        pos = int(np.argmax(nearest))
        v = int(pool[pos])
        chosen.append(v)
        np.minimum(nearest, dataset.distances(v, pool), out=nearest)
        nearest[pos] = -np.inf
    return np.sort(np.asarray(chosen, dtype=np.intp))


def gmm_per_color(dataset: Dataset, k: int) -> Indices:
    """Coreset of at most k points per color, each chosen by gmm in its color."""
    kept: list[Indices] = []
    for color in range(dataset.m):
        members = dataset.color_indices(color)
        if len(members):
            size = min(k, len(members))
            kept.append(gmm(dataset, size, int(members[0]), members))
    _log.debug(f"gmm_per_color(k={k}): {sum(len(x) for x in kept)} of {dataset.n}")
    return np.sort(np.concatenate(kept))
