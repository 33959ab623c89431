"""Load experiment configurations from JSON or markdown preset files.

Presets under data/experiments/ are markdown files with YAML frontmatter,
like every other data file of the project; the body becomes the
description. Plain JSON files are accepted as well.
"""

import json
import os
from pathlib import Path
from typing import Any, Optional

import frontmatter
from pydantic import ValidationError

from src.domain.errors import ConfigError
from src.domain.experiment import ExperimentConfig

ENV_DEFAULTS = {
    "AIRCOMP_OUT_DIR": ("out_dir", str),
    "AIRCOMP_WORKERS": ("workers", int),
}


def read_config_file(filepath: Path) -> dict[str, Any]:
    """Raw key/value pairs of a config file (.json or .md).

    Raises:
        ConfigError: If the file is missing, unreadable or not a mapping
    """
    filepath = Path(filepath)
    if not filepath.is_file():
        raise ConfigError(f"config file not found: {filepath}")
    try:
        if filepath.suffix.lower() == ".md":
            post = frontmatter.load(filepath)
            data = dict(post.metadata)
            body = (post.content or "").strip()
            if body and "description" not in data:
                data["description"] = body
        else:
            data = json.loads(filepath.read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot parse config file {filepath}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config file {filepath} must contain an object, got {type(data).__name__}")
    return data


def env_defaults() -> dict[str, Any]:
    """Defaults taken from AIRCOMP_* environment variables."""
    values = {}
    for variable, (key, cast) in ENV_DEFAULTS.items():
        raw = os.getenv(variable)
        if raw:
            try:
                values[key] = cast(raw)
            except ValueError as e:
                raise ConfigError(f"{variable} has an invalid value {raw!r}") from e
    return values


def build_config(
    filepath: Optional[Path] = None,
    overrides: Optional[dict[str, Any]] = None,
    defaults: Optional[dict[str, Any]] = None,
) -> ExperimentConfig:
    """Merge environment defaults, file values and flag overrides, then validate.

    Precedence: overrides > file > environment > defaults > model defaults.
    None-valued overrides are ignored.

    Raises:
        ConfigError: If the merged configuration is invalid
    """
    merged = dict(defaults or {})
    merged.update(env_defaults())
    if filepath is not None:
        merged.update(read_config_file(filepath))
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(f"invalid experiment config: {e}") from e
