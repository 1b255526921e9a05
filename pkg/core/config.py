"""
tmdyn Config - Budgets and ledger settings from config.json.

Values load into a pydantic Settings model. Runtime overrides use the
schema-safe env convention TMDYN_SET_section__key=value.
"""

from __future__ import annotations

import copy
import json
import os
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError

from core.errors import InputError

ENV_PREFIX = "TMDYN_SET_"


class BudgetSettings(BaseModel):
    max_configurations: int = 1 << 24
    max_branches: int = 1 << 20


class SearchSettings(BaseModel):
    radius: int = 6
    horizon: int = 500
    nmax: int = 6


class RecognizerSettings(BaseModel):
    l_max: int = 12
    t_max: int = 8


class LoggingSettings(BaseModel):
    level: str = "INFO"
    ledger_enabled: bool = True
    jsonl_dir: str = "data/logs"
    sqlite_path: str = "data/db/runs.db"


class Settings(BaseModel):
    budgets: BudgetSettings = BudgetSettings()
    search: SearchSettings = SearchSettings()
    recognizer: RecognizerSettings = RecognizerSettings()
    logging: LoggingSettings = LoggingSettings()


def apply_env_overrides(config: dict, prefix: str = ENV_PREFIX) -> tuple[dict, list[str], list[str]]:
    """Apply schema-safe env overrides onto an existing config dictionary.

    Env format:
    - TMDYN_SET_search__horizon=800
    - TMDYN_SET_logging__ledger_enabled=false

    Rules:
    - Path must already exist in config (schema-safe)
    - Value is type-cast based on current value type
    """
    updated = copy.deepcopy(config)
    errors: list[str] = []
    applied: list[str] = []

    def _parse_bool(value: str) -> bool:
        lowered = value.strip().lower()
        if lowered in {"1", "true", "yes", "on"}:
            return True
        if lowered in {"0", "false", "no", "off"}:
            return False
        raise ValueError("expected boolean")

    def _resolve(node: dict, segment: str) -> str:
        if segment in node:
            return segment
        lower_map = {k.lower(): k for k in node if isinstance(k, str)}
        return lower_map.get(segment.lower(), "")

    for key, raw_value in sorted(os.environ.items()):
        if not key.startswith(prefix):
            continue

        path = [segment for segment in key[len(prefix):].split("__") if segment]
        if not path:
            errors.append(f"{key}: missing path")
            continue

        node: Any = updated
        for segment in path[:-1]:
            resolved = _resolve(node, segment) if isinstance(node, dict) else ""
            if not resolved:
                node = None
                break
            node = node[resolved]

        leaf = _resolve(node, path[-1]) if isinstance(node, dict) else ""
        if not leaf:
            errors.append(f"{key}: path does not exist in config")
            continue

        current = node[leaf]
        try:
            if isinstance(current, bool):
                casted = _parse_bool(raw_value)
            elif isinstance(current, int):
                casted = int(raw_value)
            elif isinstance(current, float):
                casted = float(raw_value)
            elif isinstance(current, (dict, list)):
                casted = json.loads(raw_value)
                if not isinstance(casted, type(current)):
                    raise ValueError(f"expected {type(current).__name__}")
            else:
                casted = raw_value
        except ValueError as exc:
            errors.append(f"{key}: invalid value ({exc})")
            continue

        node[leaf] = casted
        applied.append(f"{prefix}{'__'.join(path).lower()}")

    return updated, errors, applied


def load_settings(path: str | Path | None = "config.json", env: bool = True) -> tuple[Settings, list[str]]:
    """Read config.json (if present), apply env overrides, validate.

    Returns the settings and the list of ignored override messages.
    """
    raw: dict = Settings().model_dump()
    if path is not None and Path(path).exists():
        try:
            file_values = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path} is not valid JSON: {exc}") from exc
        for section, values in file_values.items():
            if section in raw and isinstance(values, dict):
                raw[section].update(values)

    errors: list[str] = []
    if env:
        raw, errors, _ = apply_env_overrides(raw)

    try:
        return Settings.model_validate(raw), errors
    except ValidationError as exc:
        raise InputError(f"invalid configuration: {exc.errors()[0]['msg']}") from exc
