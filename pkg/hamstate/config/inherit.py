# -*- coding: utf-8 -*-

"""
Shared defaults for the preset tree.

A preset file holds one table per preset. A top-level ``_defaults`` table maps
dotted path patterns to values that every preset receives unless it sets the
key itself::

    [_defaults]
    "*.time.stride" = 10
    "*.observation.sigma" = 0.1

    [nls1d.time]
    t_final = 20.0

    [paper-nls1d.observation]
    sigma = 0.1

After :func:`apply_inheritance` both presets have ``time.stride = 10``; a
preset that has no ``time`` table gets one. ``*`` matches every key of the
current level except ``_defaults``. Tables may carry their own ``_defaults``,
which are applied before those of the enclosing table.
"""

import typing as T

from ..exc import ConfigError, make_config_error

DEFAULTS = "_defaults"
"""
Key of the table holding inheritable default values.
"""


def make_inherit_error(prefix: str, key: str) -> ConfigError:
    """
    Error for a default that targets a node which is not a table.

    :param prefix: dotted path of the offending node
    :param key: the key the default tried to set under it
    """
    return make_config_error(
        prefix.lstrip("."),
        f"is not a table, cannot inherit a default for {key!r}",
    )


def inherit_value(
    path: str,
    value: T.Any,
    data: T.Dict[str, T.Any],
    _prefix: str = "",
) -> None:
    """
    Set ``value`` at every location matched by the dotted pattern ``path``,
    keeping values that are already there and creating missing tables.

    :param path: dotted pattern, e.g. ``"*.time.stride"``
    :param value: default value
    :param data: preset tree, modified in place
    """
    if path.endswith("*"):
        raise make_config_error(f"{DEFAULTS}.{path}", "a pattern cannot end with '*'")
    if not isinstance(data, dict):
        raise make_inherit_error(_prefix, path)

    key, _, rest = path.partition(".")
    if rest == "":
        data.setdefault(key, value)
        return

    if key == "*":
        targets = [k for k in data if k != DEFAULTS]
    else:
        data.setdefault(key, {})
        targets = [key]
    for k in targets:
        inherit_value(rest, value, data[k], _prefix=f"{_prefix}.{k}")


def apply_inheritance(data: T.Dict[str, T.Any]) -> None:
    """
    Resolve and remove every ``_defaults`` table of ``data`` in place.

    Nested tables are resolved first, so a nested ``_defaults`` wins over an
    enclosing one for the same key. Within one ``_defaults`` table the first
    matching pattern wins, which allows an exception to precede a wildcard::

        [_defaults]
        "paper-swe2d.observation.sigma" = 0.1
        "*.observation.sigma" = 0.5
    """
    for key, value in data.items():
        if key != DEFAULTS and isinstance(value, dict):
            apply_inheritance(value)

    defaults = data.pop(DEFAULTS, None)
    if defaults is None:
        return
    for path, value in defaults.items():
        inherit_value(path=path, value=value, data=data)
