import logging
import os
from copy import deepcopy
from pathlib import Path

import yaml
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS_PATH = Path("config/settings.yaml")

DEFAULTS = {
    "engine": {"characteristic": 32003, "order": "degrevlex", "certify": False},
    "sampling": {"grid": [1, 8], "parallel": False, "workers": 4},
    "fitting": {"max_degree": None, "onsets": [1, 5]},
    "harness": {"budget": 8, "window": 4},
    "output": {"directory": "output"},
    "logging": {"directory": "logs", "level": "INFO"},
}


def _merge(base, override):
    merged = deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_settings(path=None):
    """Load application settings from a YAML file.

    A .env file is read first; TORHILB_SETTINGS may point at another settings
    file and TORHILB_LOG_LEVEL overrides the log level. Missing keys fall back
    to the built-in defaults.
    """
    load_dotenv()
    path = Path(path or os.getenv("TORHILB_SETTINGS") or DEFAULT_SETTINGS_PATH)
    settings = {}
    if path.exists():
        with open(path, "r") as file:
            settings = yaml.safe_load(file) or {}
    else:
        logger.warning(f"Settings file {path} not found, using defaults")
    settings = _merge(DEFAULTS, settings)
    level = os.getenv("TORHILB_LOG_LEVEL")
    if level:
        settings["logging"]["level"] = level
    return settings
