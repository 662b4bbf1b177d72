"""Gaussian clouds for scalability experiments.

Isotropic unit-variance 2-D clouds with centers uniform in [-bound, bound]^2;
every point picks a cloud and a color uniformly at random.
"""
import logging
from pathlib import Path

import numpy as np

from fairmmd.core import Dataset
from fairmmd.util import cli, config

from . import table

_log = logging.getLogger(__name__)


def main(argv: list[str] | None = None):
    opts = config["synthetic"]
    parser = cli.ArgumentParser()
    parser.add_argument("-n", type=int, default=1000)
    parser.add_argument("-m", type=int, default=3)
    parser.add_argument("--clouds", type=int)
    parser.add_argument("--bound", type=float)
    parser.add_argument("-s", "--seed", type=int, default=0)
    parser.add_argument("-o", "--outfile", type=Path, default=Path("synthetic.csv"))
    args = parser.parse_args(argv or None)
    if not args.n >= args.m >= 1:
        parser.error(f"need n >= m >= 1: n={args.n} m={args.m}")
    dataset = gen_synthetic(
        args.n,
        args.m,
        args.seed,
        clouds=args.clouds or opts["clouds"],
        bound=args.bound or opts["bound"],
    )
    print(table.write_csv(dataset, args.outfile))


def gen_synthetic(
    n: int, m: int, seed: int = 0, *, clouds: int = 10, bound: float = 10.0
) -> Dataset:
    assert n >= m >= 1, (n, m)
    assert clouds >= 1, clouds
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-bound, bound, size=(clouds, 2))
    membership = rng.integers(clouds, size=n)
    points = centers[membership] + rng.standard_normal((n, 2))
    colors = rng.integers(m, size=n)
    _log.debug(f"synthetic: {n=} {m=} counts={np.bincount(colors, minlength=m)}")
    return Dataset(points, colors, m)


if __name__ == "__main__":
    main()
