"""Key=value configuration with environment-variable overrides.

Resolution order for each key: command-line flag, then COGNIPROF_<KEY>
from the environment, then the config file, then the built-in default.
"""

from __future__ import annotations

import os
from pathlib import Path

from .errors import ValidationError

ENV_PREFIX = "COGNIPROF_"


def load_config(path=None) -> dict[str, str]:
    """Parse a key=value file; '#' starts a comment, blank lines ignored."""
    if path is None:
        return {}
    values = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValidationError(f"config line {line_no}: expected key=value")
        key, value = stripped.split("=", 1)
        values[key.strip().lower().replace("-", "_")] = value.strip()
    return values


def resolve(key: str, cli_value, file_values: dict[str, str], default, cast=str):
    """Pick the effective value for `key` and cast it."""
    if cli_value is not None:
        return cli_value
    env_value = os.environ.get(ENV_PREFIX + key.upper())
    if env_value is not None:
        return cast(env_value)
    if key in file_values:
        return cast(file_values[key])
    return default
