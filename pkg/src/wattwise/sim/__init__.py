"""Discrete-event office simulation: scenarios, personas, sessions, traces
and acceptance metrics."""

from .environment import IndoorState, step_dynamics
from .metrics import ConfigMismatchError, render_csv, render_json, render_text, report_metrics, summarize_log
from .scenario import (
    ApplianceSpec,
    DynamicsParams,
    Persona,
    ScenarioError,
    ScenarioSpec,
    UserParams,
    WeatherParams,
    load_bundled_persona,
    load_bundled_scenario,
    uniform_persona,
)
from .session import Session, SessionResult
from .trace import default_kb, generate_trace, schedule_kb

__all__ = [
    "ApplianceSpec", "ConfigMismatchError", "DynamicsParams", "IndoorState", "Persona",
    "ScenarioError", "ScenarioSpec", "Session", "SessionResult", "UserParams",
    "WeatherParams", "default_kb", "generate_trace", "load_bundled_persona",
    "load_bundled_scenario", "render_csv", "render_json", "render_text",
    "report_metrics", "schedule_kb", "step_dynamics", "summarize_log", "uniform_persona",
]
