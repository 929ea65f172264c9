"""
Project logging.

Notes:
- logs go to stdout, one JSON object per line by default
- structured data travels in extra={"payload": {...}}
- every JSON line carries the env and the default numeric mode, so logs from
  rational and float runs can be told apart
- the LP layer logs under its own name with its own level (LAB_SOLVER_LOG_LEVEL)
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import sys
from typing import Any

from lottery_gap_lab.common.config import get_settings

PROJECT_LOGGER = "lottery-gap-lab"
SOLVER_LOGGER = f"{PROJECT_LOGGER}.lp"


def _level(name: str | None, default: int = logging.INFO) -> int:
    return getattr(logging, (name or "").upper(), default)


class JsonFormatter(logging.Formatter):
    def __init__(self, env: str | None = None, mode: str | None = None) -> None:
        super().__init__()
        self.env = env
        self.mode = mode

    def format(self, record: logging.LogRecord) -> str:
        ts = dt.datetime.fromtimestamp(record.created, tz=dt.timezone.utc)  # noqa: UP017
        line: dict[str, Any] = {
            "ts": ts.isoformat(timespec="milliseconds").replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "msg": record.getMessage(),
        }
        if self.env:
            line["env"] = self.env
        if self.mode:
            line["mode"] = self.mode
        payload = getattr(record, "payload", None)
        if isinstance(payload, dict):
            line["payload"] = payload
        if record.exc_info:
            line["exc_info"] = self.formatException(record.exc_info)
        return json.dumps(line, ensure_ascii=False, default=str)


def _build_formatter() -> logging.Formatter:
    s = get_settings()
    if (s.log_format or "").lower() == "text":
        return logging.Formatter(
            fmt="%(asctime)s %(levelname)s %(name)s: %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
    return JsonFormatter(env=s.app_env, mode=s.numeric_mode)


def setup_logging() -> None:
    s = get_settings()
    root = logging.getLogger()
    level = _level(s.log_level)
    root.setLevel(level)
    logging.getLogger(SOLVER_LOGGER).setLevel(_level(s.solver_log_level, level))

    # repeated calls (tests, multiprocessing workers) keep one handler
    if root.handlers:
        return

    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(_build_formatter())
    root.addHandler(handler)


def get_project_logger(name: str = PROJECT_LOGGER) -> logging.Logger:
    return logging.getLogger(name)


def get_solver_logger() -> logging.Logger:
    return logging.getLogger(SOLVER_LOGGER)
