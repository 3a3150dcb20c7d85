"""
Configuration handling for lowzero.

Configuration is layered: built-in defaults, then ``LOWZERO_*`` environment
variables, then an optional YAML file. Command-line flags are applied on top
by the CLI.
"""

import copy
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from lowzero.utils.logging_utils import get_logger

logger = get_logger(__name__)

ENV_PREFIX = "LOWZERO_"

# Default configuration
DEFAULT_CONFIG: Dict[str, Any] = {
    "quadrature": {
        "rule": "trapezoid",  # midpoint-riemann | trapezoid | gauss-legendre
        "points_per_dim": 4001,
        "refinement": 1,
        "tolerance": 1e-7,
        "transform_nodes": 256,  # Gauss-Legendre nodes for f-hat
        "x_step": 0.015625,
        "x_radius": 50.0,
        "x_radius_max": 400.0,
        "inner_points": 257,
    },
    "omega": {
        "sigma": 2.0,
        "kernel": "cos",
        "bracket": [0.05, 5.0],
        "scan_points": 64,
        "root_tolerance": 1e-3,
        "curvature": "interior",  # interior | exact
    },
    "percent": {
        "rho": 0.2,
        "levels": [2, 4, 6],
        "r_min": 2,
        "r_max": 20,
        "sigma": 2.0,
    },
    "rmt": {
        "half_size": 50,
        "samples": 20000,
        "seed": 7,
        "blocks": 100,
        "audit_fraction": 0.01,
        "z_gate": 4.0,
        "support": 1.0,
    },
    "threads": 1,
    "logging": {
        "level": "warning",
    },
}

_RULES = ("midpoint-riemann", "trapezoid", "gauss-legendre")
_CURVATURES = ("interior", "exact")


def load_config(config_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Resolve the settings of one run.

    Layers, lowest first: ``DEFAULT_CONFIG``, ``LOWZERO_*`` environment
    variables, then the YAML file. The result is validated section by section.

    Args:
        config_path: YAML file given with ``--config``

    Returns:
        Nested settings dict (a fresh copy on every call)
    """
    config = copy.deepcopy(DEFAULT_CONFIG)

    env_config = _load_from_env()
    if env_config:
        _deep_merge(config, env_config)

    if config_path:
        file_config = _load_from_file(config_path)
        if file_config:
            _deep_merge(config, file_config)

    _validate_config(config)

    return config


def _load_from_file(config_path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a YAML settings file; unreadable or non-mapping files count as empty.
    """
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        logger.warning(f"Ignoring settings file {config_path}: {e}")
        return {}

    if not isinstance(data, dict):
        logger.warning(f"Settings file {config_path} is not a mapping, ignoring it")
        return {}
    return data


def _load_from_env() -> Dict[str, Any]:
    """
    Collect ``LOWZERO_*`` overrides from the environment.

    Variables are prefixed with ``LOWZERO_`` and use double underscores for
    nesting, e.g. ``LOWZERO_QUADRATURE__POINTS_PER_DIM=2001``. ``LOWZERO_THREADS``
    sets the top-level worker cap.

    Returns:
        Nested dict of overrides, empty when none are set
    """
    config: Dict[str, Any] = {}

    for key, value in sorted(os.environ.items()):
        if not key.startswith(ENV_PREFIX):
            continue
        parts = key[len(ENV_PREFIX):].lower().split("__")

        current = config
        for part in parts[:-1]:
            if not isinstance(current.get(part), dict):
                current[part] = {}
            current = current[part]

        current[parts[-1]] = _parse_env_value(value)

    return config


def _parse_env_value(value: str) -> Any:
    """
    Turn an environment string into an int, float, bool, list or string.

    Numbers are tried before boolean words so ``"1"`` stays an integer;
    commas make a list, e.g. ``LOWZERO_PERCENT__LEVELS=2,4,6``.
    """
    try:
        return int(value)
    except ValueError:
        pass

    try:
        return float(value)
    except ValueError:
        pass

    if value.lower() in ("true", "yes", "on"):
        return True
    if value.lower() in ("false", "no", "off"):
        return False

    # Comma-separated lists
    if "," in value:
        return [_parse_env_value(item.strip()) for item in value.split(",")]

    return value


def _deep_merge(target: Dict[str, Any], source: Dict[str, Any]) -> None:
    """
    Merge ``source`` into ``target`` in place; nested sections merge key by key.
    """
    for key, value in source.items():
        if key in target and isinstance(target[key], dict) and isinstance(value, dict):
            _deep_merge(target[key], value)
        else:
            target[key] = value


def _reset(config: Dict[str, Any], section: str, key: str, reason: str) -> None:
    logger.warning(f"Invalid {section}.{key} ({reason}), using default")
    config[section][key] = copy.deepcopy(DEFAULT_CONFIG[section][key])


def _validate_config(config: Dict[str, Any]) -> None:
    """
    Validate the configuration, replacing invalid values with defaults.

    Args:
        config: Configuration dictionary to validate
    """
    for section, default in DEFAULT_CONFIG.items():
        if section not in config:
            config[section] = copy.deepcopy(default)
        elif isinstance(default, dict):
            if not isinstance(config[section], dict):
                logger.warning(f"Section {section} is not a mapping, using defaults")
                config[section] = copy.deepcopy(default)
                continue
            for key, value in default.items():
                config[section].setdefault(key, copy.deepcopy(value))

    quad = config["quadrature"]
    if quad.get("rule") not in _RULES:
        _reset(config, "quadrature", "rule", f"expected one of {', '.join(_RULES)}")
    if not isinstance(quad.get("points_per_dim"), int) or quad["points_per_dim"] < 8:
        _reset(config, "quadrature", "points_per_dim", "must be an integer >= 8")
    if not isinstance(quad.get("tolerance"), (int, float)) or quad["tolerance"] <= 0:
        _reset(config, "quadrature", "tolerance", "must be positive")
    if not isinstance(quad.get("refinement"), int) or quad["refinement"] < 0:
        _reset(config, "quadrature", "refinement", "must be a non-negative integer")

    omega = config["omega"]
    bracket = omega.get("bracket")
    if (
        not isinstance(bracket, (list, tuple))
        or len(bracket) != 2
        or not all(isinstance(b, (int, float)) for b in bracket)
        or not 0 < bracket[0] < bracket[1]
    ):
        _reset(config, "omega", "bracket", "expected two increasing positive numbers")
    if omega.get("curvature") not in _CURVATURES:
        _reset(
            config, "omega", "curvature", f"expected one of {', '.join(_CURVATURES)}"
        )

    levels = config["percent"].get("levels")
    if isinstance(levels, int):
        config["percent"]["levels"] = [levels]
    elif not isinstance(levels, (list, tuple)) or not levels:
        _reset(config, "percent", "levels", "expected a list of even levels")

    threads = config.get("threads")
    if not isinstance(threads, int) or threads < 1:
        logger.warning("Invalid threads setting, using 1")
        config["threads"] = 1
