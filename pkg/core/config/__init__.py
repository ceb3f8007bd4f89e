"""Configuration management for daprobe."""

import json
import os
from pathlib import Path
from typing import Any, Callable, Dict, Tuple
import logging

logger = logging.getLogger(__name__)

CONFIG_FILENAME = ".daprobe_config.json"

# key -> (environment variable, type, default)
NUMERICS_KEYS: Dict[str, Tuple[str, Callable[[str], Any], Any]] = {
    "tol": ("DAPROBE_TOL", float, 1e-9),
    "steps": ("DAPROBE_STEPS", int, 256),
    "seed": ("DAPROBE_SEED", int, 0),
    "samples": ("DAPROBE_SAMPLES", int, 200),
    "starts": ("DAPROBE_STARTS", int, 8),
    "workers": ("DAPROBE_WORKERS", int, 4),
}


def get_config_path() -> Path:
    """Get the path to the daprobe config file."""
    # Try the working directory first, then home directory
    project_config = Path.cwd() / CONFIG_FILENAME
    if project_config.exists():
        return project_config
    return Path.home() / CONFIG_FILENAME


def load_config() -> Dict[str, Any]:
    """Load configuration from file."""
    config_path = get_config_path()
    if not config_path.exists():
        return {}

    try:
        with open(config_path, "r") as f:
            return json.load(f)
    except Exception as e:
        logger.warning(f"Failed to load config from {config_path}: {e}")
        return {}


def save_config(config: Dict[str, Any]) -> None:
    """Save configuration to file."""
    config_path = get_config_path()
    try:
        config_path.parent.mkdir(parents=True, exist_ok=True)
        with open(config_path, "w") as f:
            json.dump(config, f, indent=2)
        logger.info(f"Configuration saved to {config_path}")
    except Exception as e:
        logger.error(f"Failed to save config to {config_path}: {e}")
        raise


def get_numerics_config() -> Dict[str, Any]:
    """Get numeric defaults, checking env vars first, then config file."""
    stored = load_config().get("numerics", {})
    merged: Dict[str, Any] = {}
    for key, (env_var, cast, default) in NUMERICS_KEYS.items():
        raw = os.getenv(env_var)
        if raw:
            try:
                merged[key] = cast(raw)
                continue
            except ValueError:
                logger.warning(f"Ignoring {env_var}={raw!r}: not a valid {cast.__name__}")
        try:
            merged[key] = cast(stored[key]) if key in stored else default
        except (TypeError, ValueError):
            logger.warning(f"Ignoring config value {key}={stored[key]!r}")
            merged[key] = default
    return merged


def set_numerics_config(**kwargs: Any) -> Dict[str, Any]:
    """
    Persist numeric defaults in the config file.

    Raises:
        KeyError: If a key is not a known numeric setting
        ValueError: If a value cannot be converted to the setting's type
    """
    config = load_config()
    numerics = config.setdefault("numerics", {})
    for key, value in kwargs.items():
        if key not in NUMERICS_KEYS:
            raise KeyError(f"Unknown setting '{key}'; known: {', '.join(NUMERICS_KEYS)}")
        _, cast, _ = NUMERICS_KEYS[key]
        numerics[key] = cast(value)
    save_config(config)
    logger.info(f"Numerics config updated: {numerics}")
    return numerics
