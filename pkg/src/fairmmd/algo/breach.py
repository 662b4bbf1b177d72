"""Prune, decompose, and assign over a grid of guesses for the optimum.

For a guess tau of the optimal diversity, prune with gamma1 and a budget,
then repeat {random decomposition with gamma2; flow assignment} until the
assignment meets the constraints. Any feasible result has diversity of at
least gamma2 * alpha. The guesses form a geometric grid from the smallest
nonzero distance up to the largest distance; gamma2 optionally sweeps its own
grid over [gamma1 / 2, gamma1 / alpha].

RNG streams: the decomposition of repetition r for candidate (i, j) draws from
PCG64(SeedSequence(seed, spawn_key=(i, j, r))), so serial and threaded runs
agree bit for bit.
"""
import enum
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np

from fairmmd.baseline import gmm
from fairmmd.core import (
    INF,
    Dataset,
    FairnessSpec,
    FloatArray,
    Indices,
    Infeasible,
    Provenance,
    Solution,
    check_feasible,
)
from fairmmd.util import ConfDict, cli

from . import assign, decompose, prune

_log = logging.getLogger(__name__)


class Variant(enum.Enum):
    SLOW = "slow"  # gamma1 = tau/3, gamma2 = tau/3, budget n
    FAST = "fast"  # gamma1 = 2tau/5, gamma2 = tau/5, budget k

    def gamma1(self, tau: float) -> float:
        return tau / 3 if self is Variant.SLOW else 2 * tau / 5

    def gamma2(self, tau: float) -> float:
        return tau / 3 if self is Variant.SLOW else tau / 5

    def budget(self, n: int, k: int) -> int:
        return n if self is Variant.SLOW else k

    def bound(self, m: int) -> float:
        """Approximation factor for k <= m, before the grid's 1/(1+eps)."""
        if m < 2:  # noqa: PLR2004
            return 1.0
        return math.sqrt(math.log(m)) / ((3 if self is Variant.SLOW else 5) * m)


@dataclass(frozen=True)
class BreachConfig:
    variant: Variant = Variant.FAST
    epsilon: float = 0.1
    repeat_factor: int = 20
    dec_repeats: int = 3
    theory_budget: bool = False
    gamma2_sweep: bool = True
    prune_mode: prune.PruneMode = prune.PruneMode.FURTHEST
    partition: decompose.Strategy = decompose.Strategy.MATRIX
    coreset: bool = False
    seed: int = 0
    jobs: int = field(default=1, compare=False)

    def __post_init__(self):
        assert self.epsilon > 0, f"epsilon must be positive: {self.epsilon}"
        assert self.repeat_factor >= 1, self.repeat_factor
        assert self.dec_repeats >= 1, self.dec_repeats
        assert self.jobs >= 1, self.jobs

    @classmethod
    def from_config(cls, options: ConfDict, **overrides: Any):
        fields = {**options, **{k: v for k, v in overrides.items() if v is not None}}
        known = cls.__dataclass_fields__.keys()
        unknown = set(fields) - known
        assert not unknown, f"unknown breach options: {sorted(unknown)}"
        fields["variant"] = Variant(fields.get("variant", "fast"))
        fields["prune_mode"] = prune.PruneMode(fields.get("prune_mode", "furthest"))
        fields["partition"] = decompose.Strategy(fields.get("partition", "matrix"))
        return cls(**fields)

    def repeats(self, m: int) -> int:
        return self.repeat_factor * m if self.theory_budget else self.dec_repeats

    def echo(self) -> dict[str, Any]:
        """Plain values for JSON / TOML output."""
        d = asdict(self)
        for key, value in d.items():
            if isinstance(value, enum.Enum):
                d[key] = value.value
        del d["jobs"]
        return d


@dataclass(frozen=True)
class GridCandidate:
    tau_index: int
    tau: float
    gamma1: float
    gamma2s: tuple[float, ...]


@dataclass
class Timings:
    """Wall-clock seconds per phase: all pruning, then all searching."""

    prune: float = 0.0
    search: float = 0.0
    total: float = 0.0

    def as_ms(self) -> dict[str, float]:
        return {k: round(v * 1e3, 3) for k, v in asdict(self).items()}


def substream(
    seed: int, tau_index: int, gamma2_index: int, repetition: int
) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(tau_index, gamma2_index, repetition))
    return np.random.Generator(np.random.PCG64(ss))


def candidate_grid(
    dataset: Dataset, config: BreachConfig, alpha: decompose.Alpha
) -> list[GridCandidate]:
    (lowest, highest) = dataset.distance_range()
    if lowest is None:
        return []
    grid: list[GridCandidate] = []
    ratio = 1 + config.epsilon
    while (tau := lowest * ratio ** len(grid)) <= highest:
        gamma1 = config.variant.gamma1(tau)
        base = config.variant.gamma2(tau)
        gamma2s = [base]
        if config.gamma2_sweep:
            top = gamma1 / alpha.alpha
            j = 0
            while (g := gamma1 / 2 * ratio**j) <= top:
                gamma2s.append(g)
                j += 1
        grid.append(GridCandidate(len(grid), tau, gamma1, _dedup(gamma2s)))
    _log.info(
        f"grid: {len(grid)} tau in [{lowest:.6g}, {highest:.6g}]"
        f", {sum(len(c.gamma2s) for c in grid)} (tau, gamma2) pairs"
    )
    return grid


def _dedup(values: list[float]) -> tuple[float, ...]:
    out: list[float] = []
    for v in sorted(values):
        if not out or not math.isclose(v, out[-1], rel_tol=1e-12):
            out.append(v)
    return tuple(out)


def breach_fixed(  # noqa: PLR0913
    dataset: Dataset,
    spec: FairnessSpec,
    gamma1: float,
    gamma2: float,
    budget: int,
    repeats: int,
    seed: int = 0,
    *,
    mode: prune.PruneMode = prune.PruneMode.ARBITRARY,
    strategy: decompose.Strategy = decompose.Strategy.MATRIX,
) -> Solution | Infeasible:
    """Prune once with gamma1, then up to repeats decompositions with gamma2."""
    assert gamma1 > 0 and gamma2 > 0, (gamma1, gamma2)  # noqa: PT018
    alpha = decompose.compute_alpha(dataset.m)
    kept = prune.prune(dataset, prune.PruneParams(gamma1, budget, mode))
    provenance = Provenance(0, 0, -1, seed, gamma1=gamma1)
    attempt = _Attempt(dataset, spec, kept, alpha, strategy)
    return attempt.run(gamma2, repeats, provenance)


class _Attempt:
    """Decompose-and-assign loop on one pruned set, shared by its gamma2 values."""

    def __init__(
        self,
        dataset: Dataset,
        spec: FairnessSpec,
        kept: Indices,
        alpha: decompose.Alpha,
        strategy: decompose.Strategy,
    ):
        self._dataset = dataset
        self._spec = spec
        self._kept = kept
        self._alpha = alpha
        self._strategy = strategy
        self._dist: FloatArray = dataset.pairwise(kept)
        self._diameter = float(self._dist.max()) if len(kept) > 1 else 0.0

    def run(
        self, gamma2: float, repeats: int, provenance: Provenance
    ) -> Solution | Infeasible:
        theta = gamma2 * self._alpha.alpha
        if self._spec.k > 1 and theta > self._diameter:
            return Infeasible(f"gamma2*alpha={theta:.6g} exceeds the pruned diameter")
        if len(self._kept) < self._spec.k:
            return Infeasible(f"{len(self._kept)} points left after pruning")
        graph = decompose.build_threshold_graph(
            self._dataset, self._kept, theta, self._dist
        )
        hops = None
        if self._strategy is decompose.Strategy.MATRIX:
            hops = decompose.hop_distances(graph, self._alpha.delta2)
        provenance = replace(provenance, gamma2=gamma2, certificate=theta)
        result: Solution | Infeasible = Infeasible("no repetitions")
        for rep in range(repeats):
            rng = substream(
                provenance.seed, provenance.tau_index, provenance.gamma2_index, rep
            )
            dec = decompose.ckr_decompose(
                self._dataset,
                self._kept,
                gamma2,
                rng,
                alpha=self._alpha,
                graph=graph,
                hops=hops,
                strategy=self._strategy,
            )
            prov = replace(provenance, repetition=rep)
            result = assign.assign(self._dataset, dec.clusters, self._spec, prov)
            if isinstance(result, Solution):
                assert result.score >= theta, (result.score, theta)
                return result
        return result


def grid_search(
    dataset: Dataset,
    spec: FairnessSpec,
    config: BreachConfig,
    timings: Timings | None = None,
) -> Solution | Infeasible:
    """Best feasible solution over all (tau, gamma2) candidates.

    Ties on the score go to the lowest (tau index, gamma2 index).
    """
    alpha = decompose.compute_alpha(dataset.m)
    grid = candidate_grid(dataset, config, alpha)
    if not grid:
        return Infeasible("no nonzero pairwise distance")
    candidates = None
    if config.coreset:
        candidates = gmm.gmm_per_color(dataset, spec.k)
    repeats = config.repeats(dataset.m)
    budget = config.variant.budget(dataset.n, spec.k)

    def pruned(cand: GridCandidate) -> Indices:
        params = prune.PruneParams(cand.gamma1, budget, config.prune_mode)
        return prune.prune(dataset, params, candidates)

    def search(job: tuple[GridCandidate, Indices]) -> list[Solution | Infeasible]:
        (cand, kept) = job
        attempt = _Attempt(dataset, spec, kept, alpha, config.partition)
        results: list[Solution | Infeasible] = []
        for j, gamma2 in enumerate(cand.gamma2s):
            prov = Provenance(
                cand.tau_index, j, -1, config.seed, cand.tau, cand.gamma1
            )
            results.append(attempt.run(gamma2, repeats, prov))
        return results

    start = time.perf_counter()
    kept_sets = cli.thread_map(pruned, grid, jobs=config.jobs)
    middle = time.perf_counter()
    work = list(zip(grid, kept_sets, strict=True))
    outcomes = cli.thread_map(search, work, jobs=config.jobs)
    if timings is not None:
        timings.prune += middle - start
        timings.search += time.perf_counter() - middle
    best: Solution | Infeasible = Infeasible("no candidate yielded a feasible set")
    for cand, results in zip(grid, outcomes, strict=True):
        found = [r for r in results if isinstance(r, Solution)]
        _log.debug(f"tau[{cand.tau_index}]={cand.tau:.6g}: {len(found)} feasible")
        for sol in found:
            if not isinstance(best, Solution) or sol.score > best.score:
                best = sol
    if isinstance(best, Solution):
        p = best.provenance
        _log.info(f"best {best.score:.6g} at (tau, gamma2) index {p.candidate}")
    return best


def extend_for_large_k(
    dataset: Dataset, spec: FairnessSpec
) -> tuple[Dataset, FairnessSpec]:
    """Pad with k - m empty colors bounded by (0, 0) when k > m."""
    if spec.k <= dataset.m:
        return (dataset, spec)
    extra = spec.k - dataset.m
    ext_spec = FairnessSpec(
        spec.k, spec.lower + (0,) * extra, spec.upper + (0,) * extra
    )
    return (dataset.with_colors(spec.k), ext_spec)


def solve(
    dataset: Dataset,
    spec: FairnessSpec,
    config: BreachConfig | None = None,
    timings: Timings | None = None,
) -> Solution | Infeasible:
    """Public entry point: prechecks, special cases, then grid_search."""
    config = config or BreachConfig()
    start = time.perf_counter()
    check_feasible(dataset, spec)
    if dataset.m == 1:
        _log.warning("single color: greedy max-min selection instead of the grid")
        picked = gmm.gmm(dataset, spec.k) if spec.k > 1 else [0]
        result = Solution.build(dataset, picked, spec, Provenance(seed=config.seed))
    else:
        (ext_data, ext_spec) = extend_for_large_k(dataset, spec)
        if ext_data.distance_range()[0] is None:
            _log.warning("all points coincide: any feasible set scores 0")
            result = _singletons(ext_data, ext_spec)
        else:
            result = grid_search(ext_data, ext_spec, config, timings)
            if isinstance(result, Infeasible) and dataset.has_coincident:
                _log.warning(f"{result.reason}; retrying with coincident points")
                result = _singletons(ext_data, ext_spec)
        if isinstance(result, Solution):
            result = Solution.build(dataset, result.indices, spec, result.provenance)
    if timings is not None:
        timings.total += time.perf_counter() - start
    if isinstance(result, Solution):
        assert result.feasible, result
        assert result.score < INF or spec.k == 1, result
    return result


def _singletons(dataset: Dataset, spec: FairnessSpec) -> Solution | Infeasible:
    """Every point its own cluster: feasible iff the bounds are; score may be 0."""
    return assign.assign(dataset, [np.asarray([i]) for i in range(dataset.n)], spec)
