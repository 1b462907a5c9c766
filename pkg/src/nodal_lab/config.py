"""Experiment config loading, saving and hashing."""

import hashlib
import json
import os
from pathlib import Path

import yaml
from pydantic import ValidationError

from nodal_lab.errors import NodalLabError
from nodal_lab.models import ExperimentConfig, LabConfig

# Constants
CONFIG_YAML = "nodal-lab.yaml"
CONFIG_JSON = "nodal-lab.json"
THREADS_ENV = "NODAL_LAB_THREADS"
# Parameters that name where results go rather than what is computed.
UNHASHED_PARAMS = frozenset({"output", "threads", "verbose", "config"})


class ConfigError(NodalLabError):
    """Error related to config operations."""

    pass


class ConfigNotFoundError(ConfigError):
    """Config file not found."""

    pass


class ConfigValidationError(ConfigError):
    """Config validation failed."""

    pass


def find_config(root: Path) -> Path | None:
    """Find the config file in a directory, preferring YAML over JSON.

    Args:
        root: Directory to search

    Returns:
        Path to config file, or None if not found
    """
    yaml_path = root / CONFIG_YAML
    json_path = root / CONFIG_JSON

    if yaml_path.exists():
        return yaml_path
    elif json_path.exists():
        return json_path
    return None


def load_config(path: Path) -> LabConfig:
    """Load and validate a config file.

    A directory is searched with :func:`find_config`; ``.yaml``/``.yml`` files are
    parsed as YAML and anything else as JSON.

    Raises:
        ConfigNotFoundError: If no config file exists
        ConfigValidationError: If the config fails validation
    """
    config_path = find_config(path) if path.is_dir() else path
    if config_path is None or not config_path.exists():
        raise ConfigNotFoundError(
            f"No config found at {path}. Expected a file or a directory holding "
            f"{CONFIG_YAML} or {CONFIG_JSON}."
        )

    try:
        content = config_path.read_text(encoding="utf-8")
        if config_path.suffix in (".yaml", ".yml"):
            data = yaml.safe_load(content)
        else:
            data = json.loads(content)
        return LabConfig.model_validate(data or {})

    except yaml.YAMLError as e:
        raise ConfigValidationError(f"Invalid YAML in config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigValidationError(f"Invalid JSON in config: {e}") from e
    except ValidationError as e:
        raise ConfigValidationError(f"Config validation failed:\n{e}") from e


def save_config(path: Path, config: LabConfig) -> Path:
    """Save a config as YAML, or JSON when the path ends in ``.json``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    data = config.model_dump(exclude_none=True, mode="json")
    data = {k: v for k, v in data.items() if v != {}}
    if path.suffix == ".json":
        content = json.dumps(data, indent=2, sort_keys=True) + "\n"
    else:
        content = yaml.dump(
            data,
            default_flow_style=False,
            sort_keys=False,
            allow_unicode=True,
            width=100,
        )
    path.write_text(content, encoding="utf-8")
    return path


def canonical_json(config: ExperimentConfig) -> str:
    """Single-line JSON of everything that determines the numbers of a run."""
    params = {k: v for k, v in config.params.items() if k not in UNHASHED_PARAMS}
    payload = {"command": config.command, "params": params, "seed": config.seed}
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of :func:`canonical_json`; output paths and threads do not count."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def resolve_threads(flag: int | None, config: LabConfig | None = None) -> int:
    """Thread count from the flag, the config file, then $NODAL_LAB_THREADS, else 1.

    Raises:
        ConfigValidationError: If the environment variable is not an integer >= 1
    """
    if flag is not None:
        return flag
    if config is not None and config.threads is not None:
        return config.threads
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return 1
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        raise ConfigValidationError(f"{THREADS_ENV} must be an integer >= 1, got {raw!r}")
    return value
