"""
Identifier helpers.

Purpose:
- deterministic instance and run ids (same config -> same id)
"""

from __future__ import annotations


def instance_id(setting: int, seed: int, index: int, prefix: str = "inst") -> str:
    """
    Format: <prefix>_s<setting>_<seed>_<index:05d>
    """
    return f"{prefix}_s{setting}_{seed}_{index:05d}"


def config_run_id(setting: int, seed: int, count: int, prefix: str = "run") -> str:
    """
    Run id written into report.json; wall-clock data lives in timing.json only.
    """
    return f"{prefix}_s{setting}_{seed}_n{count}"
