# -*- coding: utf-8 -*-

"""
Layering of configuration sources.

A resolved preset, a user file and command line flags are combined by
:func:`deep_merge`: tables are merged key by key at any depth, every other
value (numbers, strings, arrays) of the later source replaces the earlier one
wholesale. Sensor position arrays are therefore never mixed element by
element.
"""

import typing as T
import copy

from ..exc import make_config_error


def deep_merge(
    base: T.Dict[str, T.Any],
    override: T.Dict[str, T.Any],
    _fullpath: str = "",
) -> T.Dict[str, T.Any]:
    """
    Return a new mapping with ``override`` layered on top of ``base``.

    Neither input is modified.

    :raises ConfigError: when a table in one source meets a non-table value
        in the other
    """
    result = copy.deepcopy(base)
    for key, value in override.items():
        path = f"{_fullpath}.{key}" if _fullpath else key
        if key not in result:
            result[key] = copy.deepcopy(value)
            continue
        current = result[key]
        if isinstance(current, dict) and isinstance(value, dict):
            result[key] = deep_merge(current, value, path)
        elif isinstance(current, dict) or isinstance(value, dict):
            raise make_config_error(
                path,
                f"cannot merge a {type(value).__name__} into a "
                f"{type(current).__name__}, both must be tables",
            )
        else:
            result[key] = copy.deepcopy(value)
    return result
