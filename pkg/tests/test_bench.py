from pathlib import Path

import polars as pl
import pytest
from fairmmd import bench
from fairmmd.algo.breach import BreachConfig
from fairmmd.util import cli, config


def test_suite_from_config():
    options = {k: v for k, v in config["bench"].items() if not isinstance(v, dict)}
    suite = bench.Suite.from_config({**options, **config["bench"]["vary_m"]})
    assert suite.n == (1000,)
    assert suite.m == tuple(range(2, 21, 2))
    assert suite.k == (30,)
    assert suite.repetitions == 5  # noqa: PLR2004
    assert len(suite.configurations()) == 10  # noqa: PLR2004
    suite = bench.Suite.from_config({**options, **config["bench"]["vary_n"]})
    assert suite.n == (100, 1000, 10000, 100000)
    assert suite.variants == ("fast",)
    suite = bench.Suite.from_config(options, k=[5], repetitions=2)
    assert suite.k == (5,)
    assert suite.repetitions == 2  # noqa: PLR2004


def test_empty_suite(tmp_path: Path):
    out = tmp_path / "bench.csv"
    assert bench.main(["-n", "-m", "3", "-k", "5", "-o", str(out)]) == cli.EXIT_FEASIBLE
    assert out.read_text().strip() == ",".join(bench.SCHEMA)


def test_run_suite():
    suite = bench.Suite(n=(60,), m=(2, 3), k=(4,), repetitions=2, exact=False)
    frame = bench.run_suite(suite, BreachConfig(epsilon=0.5))
    assert frame.columns == list(bench.SCHEMA)
    assert frame.height == 2 * 3  # noqa: PLR2004
    assert frame["algorithm"].to_list() == ["breach-fast", "breach-slow", "gmm"] * 2
    breach_rows = frame.filter(pl.col("algorithm").str.starts_with("breach"))
    assert (breach_rows["feasible_rate"] == 1.0).all()
    assert (frame["repetitions"] == 2).all()  # noqa: PLR2004
    assert (frame["mean_time_ms"] >= 0).all()


def test_exact_rows(tmp_path: Path):
    out = tmp_path / "bench.csv"
    argv = ["-n", "14", "-m", "2", "-k", "3", "-r", "2", "--exact"]
    code = bench.main([*argv, "--variants", "fast", "-o", str(out)])
    assert code == cli.EXIT_FEASIBLE
    frame = pl.read_csv(out)
    assert frame["algorithm"].to_list() == ["breach-fast", "gmm", "exact"]
    exact = frame.filter(pl.col("algorithm") == "exact")
    fast = frame.filter(pl.col("algorithm") == "breach-fast")
    assert exact["repetitions"][0] == 2  # noqa: PLR2004
    assert exact["feasible_rate"][0] == fast["feasible_rate"][0]
    if fast["mean_diversity"][0] is not None:
        assert exact["mean_diversity"][0] >= fast["mean_diversity"][0]


def test_guard_noted(tmp_path: Path):
    out = tmp_path / "bench.csv"
    argv = ["-n", "40", "-m", "2", "-k", "12", "-r", "1", "--exact", "--no-gmm"]
    code = bench.main([*argv, "--variants", "fast", "-o", str(out)])
    assert code == cli.EXIT_ORACLE_GUARD
    frame = pl.read_csv(out)
    exact = frame.filter(pl.col("algorithm") == "exact")
    assert exact["note"][0] == bench.GUARD_NOTE
    assert exact["repetitions"][0] == 0
    assert exact["mean_diversity"].is_null().all()


@pytest.mark.parametrize(
    ("k", "note"), [(1, "infeasible bounds"), (200, "k=200 exceeds n=20")]
)
def test_skipped_instances(k: int, note: str):
    suite = bench.Suite(n=(20,), m=(2,), k=(k,), repetitions=1, variants=())
    frame = bench.run_suite(suite, BreachConfig())
    assert frame["algorithm"].to_list() == ["gmm"]
    assert frame["note"][0].startswith(note)
    assert frame["repetitions"][0] == 0
    assert frame["mean_diversity"].is_null().all()
