"""CSV datasets and constraint files.

dataset CSV: header row, numeric feature columns, one categorical color column.
constraint file: `color_id,lower,upper` per line, dense color ids.
"""
import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import polars as pl

from fairmmd.core import Dataset, FairnessSpec, InputError
from fairmmd.util import cli

_log = logging.getLogger(__name__)


def main(argv: list[str] | None = None):
    parser = cli.ArgumentParser()
    parser.add_argument("--color", default="color")
    parser.add_argument("--features", nargs="*")
    parser.add_argument("infile", type=Path)
    args = parser.parse_args(argv or None)
    try:
        dataset = load_csv(args.infile, args.color, args.features)
    except InputError as err:
        _log.error(str(err))
        parser.exit(cli.EXIT_INPUT_ERROR)
    print(f"n={dataset.n} dim={dataset.dim} m={dataset.m}")
    for i, (label, count) in enumerate(
        zip(dataset.labels, dataset.color_counts, strict=True)
    ):
        print(f"{i}\t{label}\t{count}")


def load_csv(
    path: Path,
    color_column: str = "color",
    feature_columns: Sequence[str] | None = None,
) -> Dataset:
    """Colors get dense ids in order of first appearance; labels keep the names."""
    try:
        frame = pl.read_csv(path, infer_schema_length=0)
    except FileNotFoundError as err:
        msg = f"{path}: no such file"
        raise InputError(msg) from err
    except pl.exceptions.NoDataError as err:
        msg = f"{path}: empty file"
        raise InputError(msg) from err
    if frame.height == 0:
        msg = f"{path}: no data rows"
        raise InputError(msg)
    if color_column not in frame.columns:
        msg = f"{path}: missing color column {color_column!r}"
        raise InputError(msg)
    if feature_columns is None:
        feature_columns = [c for c in frame.columns if c != color_column]
    if missing := [c for c in feature_columns if c not in frame.columns]:
        msg = f"{path}: missing feature columns {missing}"
        raise InputError(msg)
    if not feature_columns:
        msg = f"{path}: no feature columns"
        raise InputError(msg)
    features = frame.select(
        pl.col(c).str.strip_chars().cast(pl.Float64, strict=False)
        for c in feature_columns
    )
    for name in feature_columns:
        bad = features[name].is_null() | features[name].is_nan()
        if bad.any():
            row = int(bad.arg_true()[0])
            value = frame[name][row]
            msg = f"{path}: row {row + 1}, column {name!r}: not a number {value!r}"
            raise InputError(msg)
    labels = frame[color_column].fill_null("")
    names = labels.unique(maintain_order=True).to_list()
    ids = {name: i for i, name in enumerate(names)}
    colors = np.asarray([ids[x] for x in labels.to_list()], dtype=np.intp)
    _log.info(f"{path}: n={frame.height} dim={len(feature_columns)} m={len(names)}")
    return Dataset(features.to_numpy(), colors, len(names), labels=tuple(names))


def write_csv(
    dataset: Dataset,
    path: Path,
    feature_names: Sequence[str] | None = None,
    color_column: str = "color",
):
    """Floats with 17 significant digits so that load_csv restores them exactly."""
    names = list(feature_names or [f"x{i}" for i in range(dataset.dim)])
    assert len(names) == dataset.dim, names
    columns = {
        name: np.char.mod("%.17g", dataset.points[:, i]).tolist()
        for i, name in enumerate(names)
    }
    columns[color_column] = [dataset.labels[c] for c in dataset.colors]
    path.parent.mkdir(0o755, parents=True, exist_ok=True)
    pl.DataFrame(columns).write_csv(path)
    _log.info(f"{path}")
    return path


def load_bounds(path: Path, m: int, k: int) -> FairnessSpec:
    """Colors without a line are unconstrained: lower 0, upper k."""
    lower = [0] * m
    upper = [k] * m
    try:
        lines = path.read_text().splitlines()
    except FileNotFoundError as err:
        msg = f"{path}: no such file"
        raise InputError(msg) from err
    for lineno, line in enumerate(lines, 1):
        if not (line := line.strip()) or line.startswith("#"):
            continue
        try:
            (color, lo, up) = (int(x) for x in line.split(","))
        except ValueError as err:
            msg = f"{path}:{lineno}: expected 'color_id,lower,upper': {line!r}"
            raise InputError(msg) from err
        if not 0 <= color < m:
            msg = f"{path}:{lineno}: color id {color} not in [0, {m})"
            raise InputError(msg)
        (lower[color], upper[color]) = (lo, up)
    return FairnessSpec(k, tuple(lower), tuple(upper))


if __name__ == "__main__":
    main()
