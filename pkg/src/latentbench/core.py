"""Environment-agnostic episode engine.

A task is an immutable :class:`TaskSpec` whose payload fully determines the
episode, including every stochastic trajectory (sampled at generation time,
never at step time). :func:`create_episode` builds a fresh
:class:`EpisodeState`; :func:`step` dispatches the action to the environment's
transition, appends a trace record, and advances the terminal-status machine
(running -> success | failure | budget_exhausted, never back).

Environment modules register an :class:`EnvOps` under their kind at import
time; see ``lights``, ``trading``, ``energy`` and ``repo``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from . import canonical

ENV_KINDS = ("lights", "trading", "energy", "repo")
DIFFICULTIES = ("easy", "medium", "hard")

TASK_FORMAT_VERSION = 1

FORMAT_ERROR_FEEDBACK = "Invalid action format: {reason}"


class ConfigError(ValueError):
    """Malformed task payload; message names the offending field."""


class ProtocolError(ValueError):
    """Action kind does not match the episode's environment."""


class StateError(RuntimeError):
    """Operation applied to an episode in a terminal state."""


# ---------------------------------------------------------------------------
# Actions


@dataclass(frozen=True)
class ToggleAction:
    kind = "toggle"
    index: int


@dataclass(frozen=True)
class TradeOrder:
    kind = "trade"
    buy: dict[str, int] = field(default_factory=dict)
    sell: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class DispatchCommand:
    kind = "dispatch"
    thermal: float
    wind: float
    solar: float
    battery: float


@dataclass(frozen=True)
class ShellCommand:
    kind = "shell"
    command: str


@dataclass(frozen=True)
class InvalidAction:
    """Unparseable or mismatched input; consumes a step without a transition."""

    kind = "invalid"
    reason: str
    raw: str = ""


AgentAction = ToggleAction | TradeOrder | DispatchCommand | ShellCommand | InvalidAction


def action_to_wire(action: AgentAction) -> Any:
    if isinstance(action, ToggleAction):
        return {"kind": "toggle", "index": action.index}
    if isinstance(action, TradeOrder):
        return {"kind": "trade", "buy": dict(action.buy), "sell": dict(action.sell)}
    if isinstance(action, DispatchCommand):
        return {
            "kind": "dispatch",
            "thermal": action.thermal,
            "wind": action.wind,
            "solar": action.solar,
            "battery": action.battery,
        }
    if isinstance(action, ShellCommand):
        return {"kind": "shell", "command": action.command}
    if isinstance(action, InvalidAction):
        return {"kind": "invalid", "reason": action.reason, "raw": action.raw}
    raise ProtocolError(f"unknown action type: {type(action).__name__}")


ACTION_KIND_BY_ENV = {
    "lights": "toggle",
    "trading": "trade",
    "energy": "dispatch",
    "repo": "shell",
}


# ---------------------------------------------------------------------------
# Environment contract


@dataclass(frozen=True)
class EnvOps:
    """Hooks one environment module registers with the engine.

    ``transition`` returns (new_surface, feedback, progressed, reward).
    ``evaluate`` inspects the post-step surface and returns "running",
    "success" or "failure"; budget exhaustion is applied by the engine.
    """

    kind: str
    validate_payload: Callable[[Any], None]
    initial_surface: Callable[[Any], Any]
    transition: Callable[[Any, Any, AgentAction], tuple[Any, str, bool, float | None]]
    evaluate: Callable[[Any, Any, int, int], str]
    observe: Callable[[Any, Any], str]
    snapshot: Callable[[Any, Any], Any]
    payload_to_wire: Callable[[Any], dict]
    payload_from_wire: Callable[[dict], Any]
    parse_wire_action: Callable[[Any, Any], AgentAction]

_REGISTRY: dict[str, EnvOps] = {}


def register_env(ops: EnvOps) -> None:
    _REGISTRY[ops.kind] = ops


def env_ops(kind: str) -> EnvOps:
    try:
        return _REGISTRY[kind]
    except KeyError:
        raise ConfigError(f"env_kind: unknown environment '{kind}'") from None


# ---------------------------------------------------------------------------
# Task metadata


@dataclass(frozen=True)
class TaskSpec:
    env_kind: str
    task_id: str
    seed: int
    step_budget: int
    difficulty: str
    payload: Any
    rules_text: str

    def __post_init__(self):
        if self.env_kind not in ENV_KINDS:
            raise ConfigError(f"env_kind: unknown environment '{self.env_kind}'")
        if self.step_budget <= 0:
            raise ConfigError(f"step_budget: must be positive, got {self.step_budget}")
        if self.difficulty not in DIFFICULTIES:
            raise ConfigError(f"difficulty: unknown tier '{self.difficulty}'")
        if not (0 <= self.seed < 1 << 64):
            raise ConfigError(f"seed: must be an unsigned 64-bit integer, got {self.seed}")
        expected = env_ops(self.env_kind).validate_payload
        expected(self.payload)


def serialize_task(task: TaskSpec) -> bytes:
    ops = env_ops(task.env_kind)
    doc = {
        "format_version": TASK_FORMAT_VERSION,
        "env_kind": task.env_kind,
        "task_id": task.task_id,
        "seed": task.seed,
        "step_budget": task.step_budget,
        "difficulty": task.difficulty,
        "payload": ops.payload_to_wire(task.payload),
        "rules_text": task.rules_text,
    }
    return canonical.dump_bytes(doc)


def deserialize_task(data: bytes) -> TaskSpec:
    doc = canonical.loads(data)
    if not isinstance(doc, dict):
        raise canonical.CanonicalError("task document must be an object", offset=0)
    version = doc.get("format_version")
    if version != TASK_FORMAT_VERSION:
        raise canonical.CanonicalError(
            f"format_version: expected {TASK_FORMAT_VERSION}, got {version!r}", offset=0
        )
    missing = [
        key
        for key in ("env_kind", "task_id", "seed", "step_budget", "difficulty", "payload", "rules_text")
        if key not in doc
    ]
    if missing:
        raise canonical.CanonicalError(f"missing fields: {', '.join(missing)}", offset=0)
    kind = doc["env_kind"]
    ops = env_ops(kind)
    try:
        payload = ops.payload_from_wire(doc["payload"])
    except (KeyError, TypeError, ValueError) as exc:
        raise canonical.CanonicalError(f"payload: {exc}", offset=0) from exc
    return TaskSpec(
        env_kind=kind,
        task_id=doc["task_id"],
        seed=doc["seed"],
        step_budget=doc["step_budget"],
        difficulty=doc["difficulty"],
        payload=payload,
        rules_text=doc["rules_text"],
    )


# ---------------------------------------------------------------------------
# Episodes


@dataclass(frozen=True)
class TraceRecord:
    """One executed step; append-only, immutable once written."""

    step_index: int
    action: AgentAction
    feedback: str
    observation_snapshot: Any
    progress_flag: bool
    reward: float | None = None


@dataclass(frozen=True)
class StepOutcome:
    observation: str
    feedback: str
    reward: float | None
    done: bool
    success: bool


@dataclass
class EpisodeState:
    task: TaskSpec
    rules_revealed: bool
    step_index: int
    status: str  # running | success | failure | budget_exhausted
    surface: Any
    trace: list[TraceRecord]

    @property
    def running(self) -> bool:
        return self.status == "running"

    @property
    def remaining_steps(self) -> int:
        return self.task.step_budget - self.step_index


def create_episode(task: TaskSpec, rules_revealed: bool = False) -> EpisodeState:
    ops = env_ops(task.env_kind)
    ops.validate_payload(task.payload)
    surface = ops.initial_surface(task.payload)
    return EpisodeState(
        task=task,
        rules_revealed=rules_revealed,
        step_index=0,
        status="running",
        surface=surface,
        trace=[],
    )


def initial_observation(episode: EpisodeState) -> str:
    ops = env_ops(episode.task.env_kind)
    obs = ops.observe(episode.task.payload, episode.surface)
    if episode.rules_revealed and episode.task.rules_text:
        return episode.task.rules_text + "\n\n" + obs
    return obs


def step(episode: EpisodeState, action: AgentAction) -> StepOutcome:
    if not episode.running:
        raise StateError(f"episode is {episode.status}; cannot step")
    ops = env_ops(episode.task.env_kind)
    expected_kind = ACTION_KIND_BY_ENV[episode.task.env_kind]
    if not isinstance(action, InvalidAction) and action.kind != expected_kind:
        raise ProtocolError(
            f"expected a {expected_kind} action for {episode.task.env_kind}, got {action.kind}"
        )

    if isinstance(action, InvalidAction):
        feedback = FORMAT_ERROR_FEEDBACK.format(reason=action.reason)
        progressed = False
        reward = None
    else:
        episode.surface, feedback, progressed, reward = ops.transition(
            episode.task.payload, episode.surface, action
        )

    record = TraceRecord(
        step_index=episode.step_index,
        action=action,
        feedback=feedback,
        observation_snapshot=ops.snapshot(episode.task.payload, episode.surface),
        progress_flag=progressed,
        reward=reward,
    )
    episode.trace.append(record)
    episode.step_index += 1

    status = ops.evaluate(
        episode.task.payload, episode.surface, episode.step_index, episode.task.step_budget
    )
    if status == "running" and episode.step_index >= episode.task.step_budget:
        status = "budget_exhausted"
    episode.status = status

    observation = ops.observe(episode.task.payload, episode.surface)
    return StepOutcome(
        observation=observation,
        feedback=feedback,
        reward=reward,
        done=not episode.running,
        success=episode.status == "success",
    )


def trace_to_wire(episode: EpisodeState) -> dict:
    """Trace document shared by the engine, the service and the harness."""
    return {
        "task_id": episode.task.task_id,
        "env_kind": episode.task.env_kind,
        "status": episode.status,
        "step_budget": episode.task.step_budget,
        "rules_revealed": episode.rules_revealed,
        "records": [
            {
                "step_index": rec.step_index,
                "action": action_to_wire(rec.action),
                "feedback": rec.feedback,
                "observation_snapshot": rec.observation_snapshot,
                "progress_flag": rec.progress_flag,
                "reward": rec.reward,
            }
            for rec in episode.trace
        ],
    }


def serialize_trace(episode: EpisodeState) -> bytes:
    return canonical.dump_bytes(trace_to_wire(episode))
