"""
Toolkit settings.

``data/settings.json`` is layered over ``config.DEFAULT_SETTINGS``: keys missing
from the file (nested ones included) take their default value. Command-line
flags are applied on top by the CLI.
"""

import copy
import json
import logging
import os
from typing import Optional, Tuple

import config

logger = logging.getLogger(__name__)


def _layered(loaded: dict, defaults: dict) -> dict:
    merged = copy.deepcopy(defaults)
    for key, value in loaded.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _layered(value, merged[key])
        else:
            merged[key] = value
    return merged


class SettingsManager:
    """Read-only view of the settings file with one accessor per setting."""

    def __init__(self, settings_file: str = config.SETTINGS_FILE):
        self.settings_file = settings_file
        self.settings = self._load()

    def _load(self) -> dict:
        defaults = copy.deepcopy(config.DEFAULT_SETTINGS)
        if not os.path.exists(self.settings_file):
            logger.info(f"No settings at {self.settings_file}, writing defaults")
            self._write(defaults)
            return defaults
        try:
            with open(self.settings_file, "r", encoding="utf-8") as handle:
                loaded = json.load(handle)
        except json.JSONDecodeError as exc:
            logger.error(f"Settings file {self.settings_file} is not valid JSON ({exc}); using defaults")
            self._write(defaults)
            return defaults
        return _layered(loaded, defaults)

    def _write(self, settings: dict) -> None:
        directory = os.path.dirname(self.settings_file)
        try:
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(self.settings_file, "w", encoding="utf-8") as handle:
                json.dump(settings, handle, indent=4)
        except OSError as exc:
            logger.warning(f"Could not write {self.settings_file}: {exc}")

    # ─────────────────────────────────────────────────────────
    # Accessors
    # ─────────────────────────────────────────────────────────
    def log_level(self) -> str:
        return str(self.settings["log_level"]).upper()

    def log_file(self) -> Optional[str]:
        return self.settings["log_file"] or None

    def jobs(self) -> int:
        return max(1, int(self.settings["jobs"]))

    def seed(self) -> int:
        return int(self.settings["seed"])

    def override_seed(self, seed: int) -> None:
        """Apply a --seed flag for the rest of the run; the file is left untouched."""
        self.settings["seed"] = int(seed)

    def matching_cap(self) -> Optional[int]:
        """The enumeration cap, None when unlimited (stored as 0)."""
        return int(self.settings["matching_cap"]) or None

    def cross_check_primes(self) -> Tuple[int, ...]:
        return tuple(int(p) for p in self.settings["cross_check_primes"])

    def search_prime(self) -> int:
        return int(self.settings["random_search"]["prime"])

    def search_trials(self) -> int:
        return int(self.settings["random_search"]["trials"])

    def suite_settings(self) -> dict:
        return copy.deepcopy(self.settings["verify_suite"])
