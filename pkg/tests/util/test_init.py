from pathlib import Path

from fairmmd.util import config, dumps, read_config, section, update_nested


def test_packaged_config():
    assert config["breach"]["variant"] in ("fast", "slow")
    assert config["breach"]["epsilon"] > 0
    assert 0 <= config["fairness"]["slack"] < 1
    assert config["oracle"]["max_n"] >= 1


def test_read_config(tmp_path: Path):
    file = tmp_path / "fairmmd.toml"
    with file.open("wt") as fout:
        fout.write(f"[scratch]\nroot = '{tmp_path}'\n")
    read_config(file)
    assert config["scratch"]["root"] == str(tmp_path)


def test_update_nested():
    x = {"both": 1, "x": 1}
    y = {"both": 2, "y": 2}
    update_nested(x, y)
    assert x == {"both": 2, "x": 1, "y": 2}
    assert y == {"both": 2, "y": 2}
    x = {"t": {"a": 1, "b": 1}}
    update_nested(x, {"t": {"b": 2}})
    assert x == {"t": {"a": 1, "b": 2}}


def test_section():
    options = section("breach", epsilon=0.5, seed=None)
    assert options["epsilon"] == 0.5  # noqa: PLR2004
    assert options["seed"] == config["breach"]["seed"]
    assert config["breach"]["epsilon"] != 0.5  # noqa: PLR2004
    assert dict(section("missing")) == {}


def test_dumps():
    text = dumps({"breach": section("breach", variant="slow"), "bench": {"n": (1, 2)}})
    assert "[breach]" in text
    assert 'variant = "slow"' in text
    assert "[bench]" in text
