"""Layered configuration.

packaged data/config.toml < ~/.fairmmd.toml < ./.fairmmd.toml < $FAIRMMD_CONFIG
< files given by -c/--config on the command line.
"""
try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib  # pyright: ignore[reportMissingImports]
import copy
import os
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Any, TypeAlias

import tomli_w

ConfDict: TypeAlias = MappingProxyType[str, Any]


def read_config(path: Path):
    with path.open("rb") as fin:
        update_nested(_config_src, tomllib.load(fin))


def update_nested(x: dict[str, Any], other: dict[str, Any]):
    for key, value in other.items():
        if isinstance(x_val := x.get(key), dict):
            update_nested(x_val, value)  # type: ignore[reportUnknownArgumentType]
        else:
            x[key] = value
    return x


def section(name: str, **overrides: Any) -> ConfDict:
    """Snapshot of one table with non-None overrides applied."""
    table: dict[str, Any] = copy.deepcopy(_config_src.get(name, {}))
    table.update({k: v for k, v in overrides.items() if v is not None})
    return ConfDict(table)


def dumps(options: dict[str, Any] | ConfDict) -> str:
    return tomli_w.dumps(_plain(options))


def _plain(x: Any) -> Any:
    if isinstance(x, dict | MappingProxyType):
        return {str(k): _plain(v) for k, v in x.items()}  # type: ignore[reportUnknownVariableType]
    return x


def resources_data(child: str = ""):
    return resources.files("fairmmd.data").joinpath(child)


with resources_data("config.toml").open("rb") as fin:
    _config_src: dict[str, Any] = tomllib.load(fin)

_config_user = Path.home() / ".fairmmd.toml"
_config_pwd = Path(".fairmmd.toml")
_config_env = Path(os.environ.get("FAIRMMD_CONFIG", _config_pwd))
for file in dict.fromkeys([_config_user, _config_pwd, _config_env]):
    if file.exists():
        read_config(file)


config = ConfDict(_config_src)
