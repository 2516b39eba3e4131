"""Flat ``key = value`` experiment files.

Lines are read with configparser after a synthetic section header, so
``#`` and ``;`` comments, ``key: value`` and continuation lines all work.
Keys use dashes or underscores interchangeably.
"""
from __future__ import annotations

import configparser
from pathlib import Path

from .errors import WreathLabError


class ConfigError(WreathLabError):
    pass


SECTION = "run"


def parse_config(text: str, source: str = "<config>") -> dict[str, str]:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=", ":"))
    cp.optionxform = str
    try:
        cp.read_string(f"[{SECTION}]\n{text}", source=source)
    except configparser.Error as e:
        raise ConfigError(f"{source}: {e}") from None
    extra = [s for s in cp.sections() if s != SECTION]
    if extra:
        raise ConfigError(f"{source}: sections are not allowed (found [{extra[0]}])")
    out = {}
    for k, v in cp.items(SECTION):
        key = k.strip().replace("-", "_")
        if not key.isidentifier():
            raise ConfigError(f"{source}: bad key {k!r}")
        out[key] = v.strip()
    return out


def load_config(path: str | Path) -> dict[str, str]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {p}: {e.strerror}") from None
    return parse_config(text, str(p))
