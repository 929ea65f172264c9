"""
Centralized lab configuration (ENV / .env).

Notes:
- settings are read from .env and environment variables (LAB_* aliases)
- typed values through pydantic-settings
- any field may be supplied from a file via <ALIAS>_FILE
"""

from __future__ import annotations

import logging
import os
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        populate_by_name=True,
        validate_assignment=True,
    )

    # -------------------------------------------------------------------------
    # Runtime
    # -------------------------------------------------------------------------
    app_env: str = Field(default="dev", alias="LAB_ENV")
    reports_dir: str = Field(default="./reports", alias="LAB_REPORTS_DIR")
    workers: int = Field(default=1, alias="LAB_WORKERS")

    # -------------------------------------------------------------------------
    # Numerics
    # -------------------------------------------------------------------------
    numeric_mode: str = Field(default="rational", alias="LAB_NUMERIC_MODE")  # rational|float
    float_tolerance: float = Field(default=1e-9, alias="LAB_FLOAT_TOLERANCE")
    prob_tolerance: float = Field(default=1e-12, alias="LAB_PROB_TOLERANCE")
    rationalize_denominator: int = Field(default=1_000_000, alias="LAB_RATIONALIZE_DENOMINATOR")

    # -------------------------------------------------------------------------
    # Capacity caps
    # -------------------------------------------------------------------------
    enumeration_cap: int = Field(default=200_000, alias="LAB_ENUMERATION_CAP")
    lp_type_cap: int = Field(default=2_000, alias="LAB_LP_TYPE_CAP")
    lp_exact_max_cells: int = Field(default=20_000, alias="LAB_LP_EXACT_MAX_CELLS")
    lp_crossover_max_vars: int = Field(default=1_000, alias="LAB_LP_CROSSOVER_MAX_VARS")
    lp_max_rows: int = Field(default=400_000, alias="LAB_LP_MAX_ROWS")
    subset_cap: int = Field(default=16, alias="LAB_SUBSET_CAP")
    assignment_cap: int = Field(default=65_536, alias="LAB_ASSIGNMENT_CAP")
    pricing_candidate_cap: int = Field(default=2_000_000, alias="LAB_PRICING_CANDIDATE_CAP")

    # -------------------------------------------------------------------------
    # Observability
    # -------------------------------------------------------------------------
    log_level: str = Field(default="INFO", alias="LAB_LOG_LEVEL")
    log_format: str = Field(default="json", alias="LAB_LOG_FORMAT")  # json|text
    solver_log_level: str = Field(default="", alias="LAB_SOLVER_LOG_LEVEL")  # empty: follow LAB_LOG_LEVEL
    metrics_textfile: str = Field(default="", alias="LAB_METRICS_TEXTFILE")

    def model_post_init(self, __context) -> None:
        _apply_file_overrides(self)


def _override_path(field_name: str, alias: str | None) -> tuple[str, str] | None:
    """(env key, path) of the first non-empty <ALIAS>_FILE / <FIELD>_FILE variable."""
    for key in (f"{alias}_FILE" if alias else None, f"{field_name.upper()}_FILE"):
        if key and (os.environ.get(key) or "").strip():
            return key, os.environ[key].strip()
    return None


def _apply_file_overrides(settings: Settings) -> None:
    # validate_assignment types the file contents like any env value
    for name, field in type(settings).model_fields.items():
        found = _override_path(name, field.alias)
        if found is None:
            continue
        key, file_path = found
        try:
            raw = Path(file_path).read_text(encoding="utf-8")
        except OSError as e:
            logging.getLogger("lottery-gap-lab").error(
                "settings_override_unreadable",
                extra={"payload": {"env_key": key, "path": file_path, "error": str(e)[:200]}},
            )
            raise RuntimeError(f"cannot read {key} override at {file_path}") from e
        setattr(settings, name, raw.strip())


_SETTINGS = Settings()


def get_settings() -> Settings:
    return _SETTINGS
