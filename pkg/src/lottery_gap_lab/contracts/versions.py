"""
Versions of the JSON documents written and read by the lab.

Purpose:
- one place for schema versions
- compatibility checks when reading instance files
"""

from __future__ import annotations

INSTANCE_SCHEMA_VERSION = "v1"
MENU_SCHEMA_VERSION = "v1"
REPORT_SCHEMA_VERSION = "v1"

SUPPORTED_INSTANCE_VERSIONS = frozenset({INSTANCE_SCHEMA_VERSION})
