"""Run-configuration handling: flat key = value files with CLI overrides.

A configuration file holds one ``key = value`` pair per line, with ``#``
comments and blank lines ignored. Keys must belong to the schema of the
command being run; unknown or duplicated keys are rejected with the line
number. Values given on the command line win over the file, which wins over
the built-in defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

__all__ = [
    "REQUIRED",
    "Param",
    "parse_bool",
    "parse_float_list",
    "parse_config_file",
    "resolve_params",
    "resolve_output_path",
    "OUTDIR_ENV",
]

OUTDIR_ENV = "SPADESIM_OUTDIR"

REQUIRED = object()


@dataclass(frozen=True)
class Param:
    """One configurable parameter of a CLI command."""

    name: str
    type: object
    default: object = None
    help: str = ""
    choices: tuple | None = None


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def parse_float_list(text) -> tuple[float, ...]:
    if isinstance(text, tuple):
        return text
    parts = [p for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(float(p) for p in parts)


def parse_config_file(path) -> dict[str, tuple[str, int]]:
    """Read a flat key = value file, keeping line numbers for diagnostics."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in entries:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        entries[key] = (value, lineno)
    return entries


def resolve_params(params, cli_args, config_path=None) -> dict:
    """Merge CLI values, config-file values and defaults into one dict."""
    file_cfg = parse_config_file(config_path) if config_path else {}
    allowed = {p.name for p in params}
    for key, (_, lineno) in file_cfg.items():
        if key not in allowed:
            raise ConfigError(
                f"{config_path}:{lineno}: unknown key {key!r} for this command"
            )
    resolved = {}
    for p in params:
        cli_value = getattr(cli_args, p.name, None)
        if cli_value is not None:
            resolved[p.name] = cli_value
            continue
        if p.name in file_cfg:
            raw, lineno = file_cfg[p.name]
            try:
                value = p.type(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{config_path}:{lineno}: bad value for {p.name}: {exc}") from None
            if p.choices is not None and value not in p.choices:
                raise ConfigError(
                    f"{config_path}:{lineno}: {p.name} must be one of {p.choices}, got {value!r}"
                )
            resolved[p.name] = value
            continue
        if p.default is REQUIRED:
            raise ConfigError(f"missing required parameter {p.name!r}")
        resolved[p.name] = p.default
    return resolved


def resolve_output_path(name, outdir=None) -> Path:
    """Anchor a relative output path in --outdir, $SPADESIM_OUTDIR or the cwd."""
    path = Path(name)
    if path.is_absolute():
        return path
    base = Path(outdir) if outdir else Path(os.environ.get(OUTDIR_ENV, "."))
    return base / path
