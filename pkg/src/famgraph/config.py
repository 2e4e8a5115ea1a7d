"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored.  Unknown keys are rejected by
name.  Precedence: built-in defaults, then the config file, then CLI flags.
"""

from __future__ import annotations

import hashlib
import json
import os
from collections.abc import Callable, Mapping
from pathlib import Path

CONFIG_ENV = "FAMGRAPH_CONFIG"


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(text: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _str(text: str) -> str:
    return text.strip()


#: key -> (parser, default)
SCHEMA: dict[str, tuple[Callable[[str], object], object]] = {
    "seed": (int, 0),
    "jobs": (int, 1),
    "input": (_str, ""),
    "output_dir": (_str, "famgraph-out"),
    "n_benign": (int, 200),
    "n_malware": (int, 200),
    "separation": (float, 1.0),
    "classifier": (_str, "rf"),
    "feature_sets": (_list, ("graph", "markov")),
    "folds": (int, 10),
    "ratio": (float, 0.8),
    "grid_search": (_bool, False),
    "n_estimators": (int, 100),
    "k": (int, 5),
    "gamma": (float, 2.0 ** -5),
    "nu": (float, 0.5),
    "n_bins": (int, 10),
    "techniques": (_list, ("ci", "see", "pack", "ir")),
    "p": (float, 1.0),
    "threshold": (int, 5),
}

DEFAULTS = {k: default for k, (_, default) in SCHEMA.items()}


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parsed key/value pairs (only the keys present in ``text``)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw.strip()!r}")
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        try:
            out[key] = SCHEMA[key][0](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    return out


def load_config(path: str | Path | None = None, overrides: Mapping | None = None) -> dict:
    """Defaults, overlaid with the file at ``path`` (or ``$FAMGRAPH_CONFIG``), then ``overrides``.

    ``None`` values in ``overrides`` are skipped so unset CLI flags fall through.
    """
    cfg = dict(DEFAULTS)
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        cfg.update(parse_config(p.read_text("utf-8"), str(p)))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        cfg[key] = value
    return cfg


def canonical_json(cfg: Mapping) -> str:
    return json.dumps({k: list(v) if isinstance(v, tuple) else v for k, v in cfg.items()},
                      sort_keys=True, separators=(",", ":"))


def config_hash(cfg: Mapping) -> str:
    return hashlib.sha256(canonical_json(cfg).encode("utf-8")).hexdigest()
