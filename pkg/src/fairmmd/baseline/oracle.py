"""Exhaustive oracles for small instances.

Enumeration limits are hard errors (OracleGuardError); an oracle never
returns a truncated answer.
"""
import itertools
import logging
import math
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike

from fairmmd.core import (
    INF,
    Dataset,
    FairnessSpec,
    Infeasible,
    OracleGuardError,
    check_feasible,
)
from fairmmd.util import ConfDict, config

_log = logging.getLogger(__name__)


def exact_fmmd(
    dataset: Dataset, spec: FairnessSpec, options: ConfDict | None = None
) -> tuple[float, tuple[int, ...]] | Infeasible:
    """Best feasible k-subset; ties go to the lexicographically first subset."""
    options = options or config["oracle"]
    subsets = math.comb(dataset.n, spec.k)
    if dataset.n > options["max_n"] and subsets > options["max_subsets"]:
        msg = f"C({dataset.n}, {spec.k}) = {subsets} subsets exceed the oracle guard"
        raise OracleGuardError(msg)
    check_feasible(dataset, spec)
    dist = dataset.pairwise(np.arange(dataset.n))
    colors = dataset.colors
    lower = np.asarray(spec.lower)
    upper = np.asarray(spec.upper)
    best_score = -1.0
    best: tuple[int, ...] = ()
    for combo in itertools.combinations(range(dataset.n), spec.k):
        counts = np.bincount(colors[list(combo)], minlength=dataset.m)
        if (counts < lower).any() or (counts > upper).any():
            continue
        score = _min_pair(dist, combo)
        if score > best_score:
            (best_score, best) = (score, combo)
    if not best:
        return Infeasible("no k-subset meets the bounds")
    _log.debug(f"exact_fmmd: {best_score:.6g} at {best}")
    return (best_score, best)


def exact_mmd(
    dataset: Dataset, k: int, options: ConfDict | None = None
) -> tuple[float, tuple[int, ...]]:
    """Unconstrained optimum."""
    spec = FairnessSpec(k, (0,) * dataset.m, (k,) * dataset.m)
    result = exact_fmmd(dataset, spec, options)
    assert not isinstance(result, Infeasible), result
    return result


def _min_pair(dist: np.ndarray, combo: Sequence[int]) -> float:
    if len(combo) <= 1:
        return INF
    return min(dist[u, v] for u, v in itertools.combinations(combo, 2))


def exact_assignment_feasible(
    clusters: Sequence[ArrayLike],
    colors: ArrayLike,
    spec: FairnessSpec,
    options: ConfDict | None = None,
) -> bool:
    """Whether choosing at most one point per cluster can meet spec.

    Each cluster either stays out or contributes one point of a color it holds.
    """
    options = options or config["oracle"]
    colors = np.asarray(colors, dtype=np.intp)
    choices = [
        [-1, *np.unique(colors[np.asarray(c, dtype=np.intp)]).tolist()]
        for c in clusters
        if len(c)
    ]
    size = math.prod(len(x) for x in choices)
    if size > options["max_assignments"]:
        msg = f"{size} cluster assignments exceed the oracle guard"
        raise OracleGuardError(msg)
    lower = np.asarray(spec.lower)
    upper = np.asarray(spec.upper)
    for pick in itertools.product(*choices):
        chosen = [j for j in pick if j >= 0]
        if len(chosen) != spec.k:
            continue
        counts = np.bincount(np.asarray(chosen, dtype=np.intp), minlength=spec.m)
        if (lower <= counts).all() and (counts <= upper).all():
            return True
    return False
