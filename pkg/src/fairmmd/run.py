"""Solve one instance and write the result as JSON.

src: CSV with numeric features and a color column
dst: {outfile}.json (and {outfile}.toml with --dump-config)

exit status: 0 feasible, 2 infeasible, 3 input error, 4 oracle guard exceeded
"""
import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import Any

from fairmmd.algo import breach
from fairmmd.baseline import oracle
from fairmmd.core import (
    Dataset,
    FairnessSpec,
    Infeasible,
    InfeasibleSpecError,
    InputError,
    OracleGuardError,
    Solution,
    proportional_spec,
)
from fairmmd.db import table
from fairmmd.util import cli, config, dumps, section

_log = logging.getLogger(__name__)


def main(argv: list[str] | None = None) -> int:
    parser = cli.ArgumentParser()
    parser.add_argument("-k", type=int, required=True)
    parser.add_argument("--color", default="color")
    parser.add_argument("--features", nargs="+")
    fairness = parser.add_mutually_exclusive_group()
    fairness.add_argument("--slack", type=float)
    fairness.add_argument("--bounds", type=Path)
    parser.add_argument("--algorithm", choices=["breach", "exact"], default="breach")
    parser.add_argument("--variant", choices=[v.value for v in breach.Variant])
    parser.add_argument("-e", "--epsilon", type=float)
    parser.add_argument("-T", "--repeat-factor", type=int)
    parser.add_argument("--dec-repeats", type=int)
    parser.add_argument("--theory-budget", action="store_true", default=None)
    parser.add_argument("--no-sweep", action="store_true")
    parser.add_argument("-s", "--seed", type=int)
    parser.add_argument("--sample", type=int)
    parser.add_argument("--no-timings", action="store_true")
    parser.add_argument("--dump-config", action="store_true")
    parser.add_argument("-o", "--outfile", type=Path, default=Path("result.json"))
    parser.add_argument("infile", type=Path)
    args = parser.parse_args(argv or None)
    options = section(
        "breach",
        variant=args.variant,
        epsilon=args.epsilon,
        repeat_factor=args.repeat_factor,
        dec_repeats=args.dec_repeats,
        theory_budget=args.theory_budget,
        gamma2_sweep=False if args.no_sweep else None,
        seed=args.seed,
    )
    try:
        cfg = breach.BreachConfig.from_config(options, jobs=args.jobs)
        dataset = table.load_csv(args.infile, args.color, args.features)
        if args.sample:
            dataset = dataset.sample(args.sample, cfg.seed)
        spec = make_spec(dataset, args.k, args.slack, args.bounds)
    except (InputError, AssertionError) as err:
        _log.error(str(err))
        return cli.EXIT_INPUT_ERROR
    except InfeasibleSpecError as err:
        _log.error(str(err))
        write_json(infeasible_document(str(err), args, cfg), args.outfile)
        return cli.EXIT_INFEASIBLE
    if args.dump_config:
        dump_config(cfg, args.outfile.with_suffix(".toml"))
    return run(dataset, spec, cfg, args)


def make_spec(
    dataset: Dataset, k: int, slack: float | None, bounds: Path | None
) -> FairnessSpec:
    if bounds:
        return table.load_bounds(bounds, dataset.m, k)
    if slack is None:
        slack = config["fairness"]["slack"]
    return proportional_spec(dataset, k, slack)


def run(
    dataset: Dataset, spec: FairnessSpec, cfg: breach.BreachConfig, args: Any
) -> int:
    timings = breach.Timings()
    try:
        if args.algorithm == "exact":
            start = time.perf_counter()
            result = exact_solution(dataset, spec)
            timings.total = time.perf_counter() - start
        else:
            result = breach.solve(dataset, spec, cfg, timings)
    except InfeasibleSpecError as err:
        result = Infeasible(str(err))
    except OracleGuardError as err:
        _log.error(str(err))
        return cli.EXIT_ORACLE_GUARD
    if isinstance(result, Infeasible):
        _log.warning(f"infeasible: {result.reason}")
        write_json(infeasible_document(result.reason, args, cfg), args.outfile)
        return cli.EXIT_INFEASIBLE
    doc = solution_document(dataset, spec, result, cfg, args)
    if not args.no_timings:
        doc["timings_ms"] = timings.as_ms()
    write_json(doc, args.outfile)
    return cli.EXIT_FEASIBLE


def exact_solution(dataset: Dataset, spec: FairnessSpec) -> Solution | Infeasible:
    result = oracle.exact_fmmd(dataset, spec)
    if isinstance(result, Infeasible):
        return result
    return Solution.build(dataset, result[1], spec)


def solution_document(
    dataset: Dataset,
    spec: FairnessSpec,
    solution: Solution,
    cfg: breach.BreachConfig,
    args: Any,
) -> dict[str, Any]:
    p = solution.provenance
    return {
        "feasible": solution.feasible,
        "solution": list(solution.indices),
        "counts": solution.counts(dataset),
        "score": _number(solution.score),
        "provenance": {
            "tau_index": p.tau_index,
            "gamma2_index": p.gamma2_index,
            "repetition": p.repetition,
            "seed": p.seed,
            "tau": _number(p.tau),
            "gamma1": _number(p.gamma1),
            "gamma2": _number(p.gamma2),
            "certificate": _number(p.certificate),
        },
        "config": config_echo(spec, cfg, args),
    }


def infeasible_document(
    reason: str, args: Any, cfg: breach.BreachConfig
) -> dict[str, Any]:
    echo: dict[str, Any] = {"input": str(args.infile), "k": args.k}
    echo.update(cfg.echo())
    return {"feasible": False, "solution": [], "reason": reason, "config": echo}


def config_echo(
    spec: FairnessSpec, cfg: breach.BreachConfig, args: Any
) -> dict[str, Any]:
    echo: dict[str, Any] = {
        "input": str(args.infile),
        "algorithm": args.algorithm,
        "k": spec.k,
        "lower": list(spec.lower),
        "upper": list(spec.upper),
        "sample": args.sample,
    }
    echo.update(cfg.echo())
    return echo


def dump_config(cfg: breach.BreachConfig, outfile: Path):
    opts = {"breach": cfg.echo(), "fairness": dict(config["fairness"])}
    _log.debug(dumps(opts))
    outfile.parent.mkdir(0o755, parents=True, exist_ok=True)
    with outfile.open("wt") as fout:
        fout.write(dumps(opts))
    _log.info(f"{outfile}")


def write_json(doc: dict[str, Any], outfile: Path):
    outfile.parent.mkdir(0o755, parents=True, exist_ok=True)
    with outfile.open("wt") as fout:
        json.dump(doc, fout, indent=2, allow_nan=False)
        fout.write("\n")
    print(outfile)


def _number(x: float) -> float | str:
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


if __name__ == "__main__":
    sys.exit(main())
