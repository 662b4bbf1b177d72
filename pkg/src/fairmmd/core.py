"""Instances, fairness constraints, diversity scoring, and feasibility checks.

All types are frozen; numpy arrays held by them are made read-only so that
they can be shared by concurrent workers.
"""
from __future__ import annotations

import enum
import functools
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import TypeAlias

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import distance as spd

_log = logging.getLogger(__name__)

INF = math.inf  # diversity of a set with fewer than two points
_EPS = 1e-9  # absorbs float noise in proportional bounds
_BLOCK_CELLS = 1 << 24  # distances per block in distance_range()

Indices: TypeAlias = NDArray[np.intp]
FloatArray: TypeAlias = NDArray[np.float64]


class FairMMDError(Exception):
    pass


class InfeasibleSpecError(FairMMDError, ValueError):
    pass


class InputError(FairMMDError, ValueError):
    pass


class OracleGuardError(FairMMDError):
    pass


class MetricKind(enum.Enum):
    EUCLIDEAN = "euclidean"
    PRECOMPUTED = "precomputed"


@dataclass(frozen=True, eq=False)
class Metric:
    """Euclidean distance on the points, or a precomputed symmetric matrix.

    The triangle inequality is assumed, not checked; approximation guarantees
    are void for inputs that violate it.
    """

    kind: MetricKind = MetricKind.EUCLIDEAN
    matrix: FloatArray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind is MetricKind.PRECOMPUTED:
            assert self.matrix is not None, "precomputed metric needs a matrix"
            mat = _readonly(np.asarray(self.matrix, dtype=np.float64))
            assert mat.ndim == 2 and mat.shape[0] == mat.shape[1], mat.shape  # noqa: PT018
            assert (mat >= 0).all(), "negative distance"
            assert np.array_equal(mat, mat.T), "asymmetric distance matrix"
            assert not mat.diagonal().any(), "nonzero self distance"
            object.__setattr__(self, "matrix", mat)
        else:
            assert self.matrix is None, self.kind


EUCLIDEAN = Metric()


@dataclass(frozen=True, eq=False)
class Dataset:
    points: FloatArray
    colors: Indices
    m: int
    metric: Metric = EUCLIDEAN
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        colors = np.asarray(self.colors, dtype=np.intp)
        assert points.ndim == 2 and points.shape[1] >= 1, points.shape  # noqa: PT018
        assert len(points) >= 1, "empty dataset"
        assert colors.shape == (len(points),), (colors.shape, points.shape)
        assert self.m >= 1, self.m
        assert colors.min() >= 0 and colors.max() < self.m, (self.m, colors)  # noqa: PT018
        if self.metric.matrix is not None:
            assert self.metric.matrix.shape[0] == len(points), "matrix size"
        labels = self.labels or tuple(str(i) for i in range(self.m))
        assert len(labels) == self.m, (labels, self.m)
        object.__setattr__(self, "points", _readonly(points))
        object.__setattr__(self, "colors", _readonly(colors))
        object.__setattr__(self, "labels", tuple(labels))

    @classmethod
    def from_matrix(
        cls, matrix: ArrayLike, colors: ArrayLike, m: int | None = None
    ) -> Dataset:
        mat = np.asarray(matrix, dtype=np.float64)
        colors = np.asarray(colors, dtype=np.intp)
        points = np.arange(len(mat), dtype=np.float64).reshape(-1, 1)
        m = m or int(colors.max()) + 1
        return cls(points, colors, m, Metric(MetricKind.PRECOMPUTED, mat))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @functools.cached_property
    def color_counts(self) -> Indices:
        return _readonly(np.bincount(self.colors, minlength=self.m))

    def color_indices(self, color: int) -> Indices:
        return np.flatnonzero(self.colors == color)

    def distance(self, u: int, v: int) -> float:
        if not (0 <= u < self.n and 0 <= v < self.n):
            msg = f"index out of range: ({u}, {v}) for n={self.n}"
            raise IndexError(msg)
        if self.metric.matrix is not None:
            return float(self.metric.matrix[u, v])
        return float(np.linalg.norm(self.points[u] - self.points[v]))

    def distances(self, u: int, others: ArrayLike | None = None) -> FloatArray:
        """Distances from u to others (all points if None)."""
        idx = np.arange(self.n) if others is None else np.asarray(others, np.intp)
        if self.metric.matrix is not None:
            return self.metric.matrix[u, idx]
        diff = self.points[idx] - self.points[u]
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def pairwise(self, rows: ArrayLike, cols: ArrayLike | None = None) -> FloatArray:
        rows = np.asarray(rows, dtype=np.intp)
        cols = rows if cols is None else np.asarray(cols, dtype=np.intp)
        if self.metric.matrix is not None:
            return self.metric.matrix[np.ix_(rows, cols)]
        return spd.cdist(self.points[rows], self.points[cols])

    def distance_range(self) -> tuple[float | None, float]:
        """(smallest nonzero distance or None, largest distance)."""
        return self._distance_range

    @functools.cached_property
    def _distance_range(self) -> tuple[float | None, float]:
        lo = INF
        hi = 0.0
        step = max(1, _BLOCK_CELLS // self.n)
        for start in range(0, self.n, step):
            rows = np.arange(start, min(start + step, self.n))
            block = self.pairwise(rows, np.arange(start, self.n))
            hi = max(hi, float(block.max()))
            if (nonzero := block[block > 0]).size:
                lo = min(lo, float(nonzero.min()))
        return (None if lo == INF else lo, hi)

    @functools.cached_property
    def has_coincident(self) -> bool:
        """True if two distinct points are at distance 0."""
        if self.metric.matrix is not None:
            return int(np.count_nonzero(self.metric.matrix == 0)) > self.n
        return len(np.unique(self.points + 0.0, axis=0)) < self.n  # -0.0 to 0.0

    def subset(self, indices: ArrayLike) -> Dataset:
        idx = np.asarray(indices, dtype=np.intp)
        metric = self.metric
        if metric.matrix is not None:
            metric = Metric(MetricKind.PRECOMPUTED, metric.matrix[np.ix_(idx, idx)])
        return Dataset(self.points[idx], self.colors[idx], self.m, metric, self.labels)

    def sample(self, size: int, seed: int = 0) -> Dataset:
        """Uniform subsample without replacement; the whole dataset if size >= n."""
        if size >= self.n:
            return self
        rng = np.random.default_rng(seed)
        return self.subset(np.sort(rng.choice(self.n, size, replace=False)))

    def with_colors(self, m: int) -> Dataset:
        """Same points under a larger palette; the added colors stay empty."""
        assert m >= self.m, (m, self.m)
        labels = self.labels + tuple(f"_{i}" for i in range(self.m, m))
        return Dataset(self.points, self.colors, m, self.metric, labels)


@dataclass(frozen=True)
class FairnessSpec:
    k: int
    lower: tuple[int, ...]
    upper: tuple[int, ...]

    def __post_init__(self):
        lower = tuple(int(x) for x in self.lower)
        upper = tuple(int(x) for x in self.upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if self.k < 1:
            msg = f"k must be positive: {self.k}"
            raise InfeasibleSpecError(msg)
        if len(lower) != len(upper):
            msg = f"bounds of different lengths: {len(lower)} != {len(upper)}"
            raise InfeasibleSpecError(msg)
        for i, (lo, up) in enumerate(zip(lower, upper, strict=True)):
            if lo < 0 or lo > up:
                msg = f"color {i}: invalid bounds {lo} > {up} or negative"
                raise InfeasibleSpecError(msg)
        if not sum(lower) <= self.k <= sum(upper):
            msg = f"no feasible set: sum(lower)={sum(lower)}, k={self.k}"
            msg += f", sum(upper)={sum(upper)}"
            raise InfeasibleSpecError(msg)

    @property
    def m(self) -> int:
        return len(self.lower)

    @property
    def slack(self) -> int:
        return self.k - sum(self.lower)


@dataclass(frozen=True)
class Provenance:
    tau_index: int = -1
    gamma2_index: int = -1
    repetition: int = -1
    seed: int = 0
    tau: float = math.nan
    gamma1: float = math.nan
    gamma2: float = math.nan
    certificate: float = 0.0  # gamma2 * alpha; lower bound on the score

    @property
    def candidate(self) -> tuple[int, int]:
        return (self.tau_index, self.gamma2_index)


@dataclass(frozen=True)
class Solution:
    indices: tuple[int, ...]
    score: float
    feasible: bool
    provenance: Provenance = Provenance()

    @classmethod
    def build(
        cls,
        dataset: Dataset,
        indices: Iterable[int],
        spec: FairnessSpec,
        provenance: Provenance = Provenance(),  # noqa: B008
    ) -> Solution:
        idx = tuple(sorted(int(i) for i in indices))
        score = diversity(dataset, idx)
        return cls(idx, score, validate(dataset, idx, spec), provenance)

    def counts(self, dataset: Dataset) -> dict[str, int]:
        bins = np.bincount(dataset.colors[list(self.indices)], minlength=dataset.m)
        return {label: int(c) for label, c in zip(dataset.labels, bins, strict=True)}


@dataclass(frozen=True)
class Infeasible:
    reason: str

    feasible = False


def distance(dataset: Dataset, u: int, v: int) -> float:
    return dataset.distance(u, v)


def diversity(dataset: Dataset, indices: Iterable[int]) -> float:
    """Minimum distance over distinct pairs; INF for fewer than two points."""
    idx = np.fromiter((int(i) for i in indices), dtype=np.intp)
    if len(idx) and (idx.min() < 0 or idx.max() >= dataset.n):
        msg = f"index out of range for n={dataset.n}: {idx}"
        raise IndexError(msg)
    if len(idx) <= 1:
        return INF
    # must match the cdist values that threshold graphs compare against
    sub = dataset.pairwise(idx)
    return float(sub[np.triu_indices(len(idx), 1)].min())


def validate(dataset: Dataset, indices: Sequence[int], spec: FairnessSpec) -> bool:
    if len(set(indices)) != len(indices) or len(indices) != spec.k:
        return False
    if spec.m != dataset.m:
        return False
    counts = np.bincount(dataset.colors[list(indices)], minlength=dataset.m)
    lower = np.asarray(spec.lower)
    upper = np.asarray(spec.upper)
    return bool(((lower <= counts) & (counts <= upper)).all())


def check_feasible(dataset: Dataset, spec: FairnessSpec):
    """Raise InfeasibleSpecError if the color classes cannot meet the bounds."""
    if spec.m != dataset.m:
        msg = f"spec has {spec.m} colors; dataset has {dataset.m}"
        raise InfeasibleSpecError(msg)
    counts = dataset.color_counts
    for i, lo in enumerate(spec.lower):
        if lo > counts[i]:
            label = dataset.labels[i]
            msg = f"color {label!r} needs {lo} points; only {counts[i]} exist"
            raise InfeasibleSpecError(msg)
    reachable = int(np.minimum(np.asarray(spec.upper), counts).sum())
    if reachable < spec.k:
        msg = f"at most {reachable} points can be selected within upper bounds"
        raise InfeasibleSpecError(msg + f"; k={spec.k}")


def proportional_spec(dataset: Dataset, k: int, slack: float = 0.2) -> FairnessSpec:
    """Proportional representation with slack factor alpha_f.

    lower = max(1, floor((1 - slack) k |V_i| / n)),
    upper = max(1, ceil((1 + slack) k |V_i| / n)).
    """
    assert k >= 1, k
    assert 0 <= slack < 1, slack
    share = k * dataset.color_counts / dataset.n
    lower = [max(1, math.floor((1 - slack) * x + _EPS)) for x in share]
    upper = [max(1, math.ceil((1 + slack) * x - _EPS)) for x in share]
    _log.debug(f"proportional bounds: {lower=} {upper=}")
    return FairnessSpec(k, tuple(lower), tuple(upper))


def equal_spec(dataset: Dataset, k: int) -> FairnessSpec:
    """Equal representation over the nonempty colors."""
    nonempty = dataset.color_counts > 0
    m = int(nonempty.sum())
    lower = [k // m if x else 0 for x in nonempty]
    upper = [-(-k // m) if x else 0 for x in nonempty]
    return FairnessSpec(k, tuple(lower), tuple(upper))


def at_most_one_spec(dataset: Dataset, k: int) -> FairnessSpec:
    """At most one representative per color."""
    return FairnessSpec(k, (0,) * dataset.m, (1,) * dataset.m)


def _readonly(x: NDArray[np.generic]):
    x = x.copy()
    x.flags.writeable = False
    return x
