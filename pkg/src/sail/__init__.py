"""Skill-adaptive migration of UI tests between apps with shared functionality."""

from .errors import SailError
from .planner import MigrationTrace, PlannerConfig, migrate
from .sim import load_app, reset
from .testcase import load_test_case
from .ui_model import extract_events, parse_hierarchy

__version__ = "0.1.0"

__all__ = [
    "MigrationTrace", "PlannerConfig", "SailError", "extract_events", "load_app", "load_test_case",
    "migrate", "parse_hierarchy", "reset",
]
