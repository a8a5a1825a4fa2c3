# -*- coding: utf-8 -*-

"""
Read presets and user files and turn them into validated configurations.
"""

import typing as T
import sys
from pathlib import Path

if sys.version_info >= (3, 11):  # pragma: no cover
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from ..exc import make_config_error
from ..paths import path_presets
from .inherit import apply_inheritance
from .merge import deep_merge
from .schema import ExperimentConfig, TransportRunConfig


def read_toml(path: T.Union[str, Path]) -> T.Dict[str, T.Any]:
    path = Path(path)
    try:
        return tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise make_config_error(str(path), "file not found")
    except tomllib.TOMLDecodeError as e:
        raise make_config_error(str(path), f"invalid TOML: {e}")


def load_presets(path: T.Union[str, Path] = path_presets) -> T.Dict[str, T.Any]:
    """
    All presets of a preset file with their ``_defaults`` resolved.
    """
    data = read_toml(path)
    apply_inheritance(data)
    return data


def preset_names() -> T.List[str]:
    return sorted(load_presets())


def resolve_mapping(
    preset: T.Optional[str] = None,
    path: T.Optional[T.Union[str, Path]] = None,
    overrides: T.Optional[T.Dict[str, T.Any]] = None,
) -> T.Dict[str, T.Any]:
    """
    Layer, in order, a built-in preset, a user TOML file and explicit
    overrides (e.g. from command line flags).

    A user file may name its base preset with a top-level ``preset = "..."``
    key; an explicit ``preset`` argument wins over it.
    """
    user = read_toml(path) if path is not None else {}
    file_preset = user.pop("preset", None)
    if file_preset is not None and not isinstance(file_preset, str):
        raise make_config_error("preset", f"must be a string, got {file_preset!r}")
    preset = preset or file_preset

    data: T.Dict[str, T.Any] = {}
    if preset is not None:
        presets = load_presets()
        if preset not in presets:
            raise make_config_error(
                "preset", f"unknown preset {preset!r}, choose from {', '.join(sorted(presets))}"
            )
        data = presets[preset]
    data = deep_merge(data, user)
    if overrides:
        data = deep_merge(data, overrides)
    return data


def load_config(
    preset: T.Optional[str] = None,
    path: T.Optional[T.Union[str, Path]] = None,
    overrides: T.Optional[T.Dict[str, T.Any]] = None,
) -> ExperimentConfig:
    """
    Resolve and validate an assimilation run configuration.

    Example::

        >>> cfg = load_config("nls1d", overrides={"experiment": {"mode": "static"}})
        >>> cfg.mode.value
        'static'
    """
    return ExperimentConfig.from_mapping(resolve_mapping(preset, path, overrides))


def load_transport_config(
    preset: T.Optional[str] = "transport",
    path: T.Optional[T.Union[str, Path]] = None,
    overrides: T.Optional[T.Dict[str, T.Any]] = None,
) -> TransportRunConfig:
    """
    Resolve and validate the transport scenario configuration.
    """
    return TransportRunConfig.from_mapping(resolve_mapping(preset, path, overrides))
