"""Deterministic interactive environments with hidden transition rules.

Four environments (bulb network, factor market, grid dispatch, dependency
repo) share one episode engine, a seeded generation substrate, and canonical
task serialization. On top sit suite curation with solvability certification,
scripted baselines, an evaluation harness for remote model endpoints, and a
session HTTP service for human play.
"""

from . import energy, lights, repo, trading  # registers the environments
from .core import (
    AgentAction,
    ConfigError,
    DispatchCommand,
    EpisodeState,
    InvalidAction,
    ProtocolError,
    ShellCommand,
    StateError,
    StepOutcome,
    TaskSpec,
    ToggleAction,
    TradeOrder,
    TraceRecord,
    create_episode,
    deserialize_task,
    initial_observation,
    serialize_task,
    serialize_trace,
    step,
    trace_to_wire,
)
from .curation import (
    CHALLENGE_PROFILE,
    LITE_PROFILE,
    SuiteProfile,
    generate_task,
    load_suite,
    sample_suite,
    verify_suite,
    write_suite,
)
from .rng import RngStream, derive_seed

__version__ = "0.1.0"

__all__ = [
    "AgentAction",
    "CHALLENGE_PROFILE",
    "ConfigError",
    "DispatchCommand",
    "EpisodeState",
    "InvalidAction",
    "LITE_PROFILE",
    "ProtocolError",
    "RngStream",
    "ShellCommand",
    "StateError",
    "StepOutcome",
    "SuiteProfile",
    "TaskSpec",
    "ToggleAction",
    "TradeOrder",
    "TraceRecord",
    "create_episode",
    "derive_seed",
    "deserialize_task",
    "energy",
    "generate_task",
    "initial_observation",
    "lights",
    "load_suite",
    "repo",
    "sample_suite",
    "serialize_task",
    "serialize_trace",
    "step",
    "trace_to_wire",
    "trading",
    "verify_suite",
    "write_suite",
]
