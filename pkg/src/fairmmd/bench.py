"""Average diversity and running time over synthetic Gaussian clouds.

dst: CSV with columns
  algorithm,n,m,k,repetitions,mean_diversity,mean_time_ms,feasible_rate,note

Repetition r of a configuration uses the dataset gen_synthetic(n, m, seed + r)
and proportional bounds. mean_diversity averages over the sets an algorithm
returned, so gmm counts even when it misses the bounds (see feasible_rate);
rows that could not run carry an empty mean and a note.
"""
import logging
import math
import sys
import time
from collections.abc import Callable, Iterable
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import polars as pl

from fairmmd.algo import breach
from fairmmd.baseline import gmm, oracle
from fairmmd.core import (
    Dataset,
    FairnessSpec,
    Infeasible,
    InfeasibleSpecError,
    OracleGuardError,
    diversity,
    proportional_spec,
    validate,
)
from fairmmd.db import synthetic
from fairmmd.util import ConfDict, cli, config, dumps

_log = logging.getLogger(__name__)

SCHEMA: dict[str, Any] = {
    "algorithm": pl.Utf8,
    "n": pl.Int64,
    "m": pl.Int64,
    "k": pl.Int64,
    "repetitions": pl.Int64,
    "mean_diversity": pl.Float64,
    "mean_time_ms": pl.Float64,
    "feasible_rate": pl.Float64,
    "note": pl.Utf8,
}
GUARD_NOTE = "oracle guard exceeded"

Solver = Callable[[Dataset, FairnessSpec], tuple[bool, float]]


@dataclass(frozen=True)
class Suite:
    n: tuple[int, ...] = ()
    m: tuple[int, ...] = ()
    k: tuple[int, ...] = ()
    repetitions: int = 5
    variants: tuple[str, ...] = ("fast", "slow")
    gmm: bool = True
    exact: bool = False
    seed: int = 0

    @classmethod
    def from_config(cls, options: ConfDict | dict[str, Any], **overrides: Any):
        fields = {**options, **{k: v for k, v in overrides.items() if v is not None}}
        fields = {k: v for k, v in fields.items() if k in cls.__dataclass_fields__}
        for key in ("n", "m", "k", "variants"):
            if key in fields:
                fields[key] = tuple(fields[key])
        return cls(**fields)

    def configurations(self) -> list[tuple[int, int, int]]:
        return [(n, m, k) for n in self.n for m in self.m for k in self.k]


def main(argv: list[str] | None = None) -> int:
    suites = [k for k, v in config["bench"].items() if isinstance(v, dict)]
    parser = cli.ArgumentParser()
    parser.add_argument("--suite", choices=suites)
    parser.add_argument("-n", type=int, nargs="*")
    parser.add_argument("-m", type=int, nargs="*")
    parser.add_argument("-k", type=int, nargs="*")
    parser.add_argument("-r", "--repetitions", type=int)
    variants = [v.value for v in breach.Variant]
    parser.add_argument("--variants", nargs="*", choices=variants)
    parser.add_argument("--no-gmm", action="store_true")
    parser.add_argument("--exact", action="store_true")
    parser.add_argument("-s", "--seed", type=int)
    parser.add_argument("-o", "--outfile", type=Path, default=Path("bench.csv"))
    args = parser.parse_args(argv or None)
    options = {k: v for k, v in config["bench"].items() if not isinstance(v, dict)}
    if args.suite:
        options.update(config["bench"][args.suite])
    suite = Suite.from_config(
        options,
        n=args.n,
        m=args.m,
        k=args.k,
        repetitions=args.repetitions,
        variants=args.variants,
        gmm=False if args.no_gmm else None,
        exact=args.exact or None,
        seed=args.seed,
    )
    _log.info(dumps({"bench": suite.__dict__}))
    cfg = breach.BreachConfig.from_config(config["breach"], jobs=args.jobs)
    frame = run_suite(suite, cfg)
    args.outfile.parent.mkdir(0o755, parents=True, exist_ok=True)
    frame.write_csv(args.outfile)
    print(args.outfile)
    if suite.exact and (frame["note"] == GUARD_NOTE).any():
        return cli.EXIT_ORACLE_GUARD
    return cli.EXIT_FEASIBLE


def run_suite(suite: Suite, cfg: breach.BreachConfig) -> pl.DataFrame:
    rows: list[dict[str, Any]] = []
    for n, m, k in suite.configurations():
        instances = list(_instances(n, m, k, suite))
        for name, solver in solvers(suite, cfg):
            row = measure(name, solver, instances)
            row.update(n=n, m=m, k=k)
            _log.info(f"{name} {n=} {m=} {k=}: {row['mean_diversity']}")
            rows.append(row)
    return pl.DataFrame(rows, schema=SCHEMA)


def solvers(suite: Suite, cfg: breach.BreachConfig) -> list[tuple[str, Solver]]:
    res: list[tuple[str, Solver]] = []
    for v in suite.variants:
        variant_cfg = replace(cfg, variant=breach.Variant(v), seed=suite.seed)
        res.append((f"breach-{v}", _breach_solver(variant_cfg)))
    if suite.gmm:
        res.append(("gmm", _gmm))
    if suite.exact:
        res.append(("exact", _exact))
    return res


def measure(
    name: str,
    solver: Solver,
    instances: list[tuple[Dataset, FairnessSpec] | str],
) -> dict[str, Any]:
    row: dict[str, Any] = {
        "algorithm": name,
        "repetitions": 0,
        "mean_diversity": None,
        "mean_time_ms": None,
        "feasible_rate": None,
        "note": "",
    }
    scores: list[float] = []
    elapsed: list[float] = []
    feasible = 0
    for inst in instances:
        if isinstance(inst, str):
            row["note"] = inst
            continue
        start = time.perf_counter()
        try:
            (ok, score) = solver(*inst)
        except OracleGuardError as err:
            _log.warning(f"{name}: {err}")
            row["note"] = GUARD_NOTE
            break
        elapsed.append(time.perf_counter() - start)
        feasible += ok
        if not math.isnan(score):
            scores.append(score)
    if elapsed:
        row["repetitions"] = len(elapsed)
        row["mean_time_ms"] = round(1e3 * sum(elapsed) / len(elapsed), 3)
        row["feasible_rate"] = feasible / len(elapsed)
    if scores:
        row["mean_diversity"] = _mean(scores)
    return row


def _instances(
    n: int, m: int, k: int, suite: Suite
) -> Iterable[tuple[Dataset, FairnessSpec] | str]:
    for r in range(suite.repetitions):
        if k > n:
            yield f"k={k} exceeds n={n}"
            continue
        dataset = synthetic.gen_synthetic(n, m, suite.seed + r)
        try:
            spec = proportional_spec(dataset, k, config["fairness"]["slack"])
        except InfeasibleSpecError as err:
            yield f"infeasible bounds: {err}"
            continue
        yield (dataset, spec)


def _breach_solver(cfg: breach.BreachConfig) -> Solver:
    def solver(dataset: Dataset, spec: FairnessSpec) -> tuple[bool, float]:
        try:
            result = breach.solve(dataset, spec, cfg)
        except InfeasibleSpecError:
            return (False, math.nan)
        if isinstance(result, Infeasible):
            return (False, math.nan)
        return (result.feasible, result.score)

    return solver


def _gmm(dataset: Dataset, spec: FairnessSpec) -> tuple[bool, float]:
    """Unconstrained greedy; feasible only if it happens to meet the bounds."""
    picked = gmm.gmm(dataset, spec.k)
    return (validate(dataset, picked.tolist(), spec), diversity(dataset, picked))


def _exact(dataset: Dataset, spec: FairnessSpec) -> tuple[bool, float]:
    try:
        result = oracle.exact_fmmd(dataset, spec)
    except InfeasibleSpecError:
        return (False, math.nan)
    if isinstance(result, Infeasible):
        return (False, math.nan)
    return (True, result[0])


def _mean(scores: list[float]) -> float:
    finite = [x for x in scores if math.isfinite(x)]
    if len(finite) < len(scores):
        return math.inf
    return sum(finite) / len(finite)


if __name__ == "__main__":
    sys.exit(main())
