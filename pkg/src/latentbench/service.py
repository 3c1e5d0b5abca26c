"""Session HTTP service: task listing and episode interaction over JSON.

Each session owns one episode; concurrent steps on the same session serialize
through a per-session lock, and sessions are otherwise fully isolated. The
exported trace embeds the engine's trace document unchanged so downstream
metric computation sees exactly what a local run would produce. Idle sessions
expire after a configurable timeout (default 24h) to survive long human-play
pauses without leaking memory.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Any

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import core, curation

DEFAULT_IDLE_TIMEOUT = 24 * 3600.0


class CreateSessionRequest(BaseModel):
    task_id: str | None = None
    env: str | None = None
    seed: int | None = None
    tier: str = "easy"
    rules_revealed: bool = False
    actor_tag: str = "anonymous"


class StepRequest(BaseModel):
    action: Any = None


@dataclass
class Session:
    session_id: str
    episode: core.EpisodeState
    actor_tag: str
    rules_revealed: bool
    created_at: float
    last_active: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self, idle_timeout: float = DEFAULT_IDLE_TIMEOUT):
        self.idle_timeout = idle_timeout
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._counter = 0

    def sweep(self, now: float | None = None) -> None:
        now = time.time() if now is None else now
        with self._lock:
            stale = [
                sid for sid, s in self._sessions.items() if now - s.last_active > self.idle_timeout
            ]
            for sid in stale:
                del self._sessions[sid]

    def create(self, episode: core.EpisodeState, actor_tag: str, rules_revealed: bool) -> Session:
        now = time.time()
        with self._lock:
            self._counter += 1
            sid = f"s{self._counter:06d}-{secrets.token_hex(4)}"
            session = Session(
                session_id=sid,
                episode=episode,
                actor_tag=actor_tag,
                rules_revealed=rules_revealed,
                created_at=now,
                last_active=now,
            )
            self._sessions[sid] = session
        return session

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            return self._sessions.get(session_id)

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)


def _error(status_code: int, code: str, message: str, **extra) -> JSONResponse:
    body = {"error": {"code": code, "message": message, **extra}}
    return JSONResponse(status_code=status_code, content=body)


def _session_view(session: Session, observation: str | None = None) -> dict:
    episode = session.episode
    view = {
        "session_id": session.session_id,
        "task_id": episode.task.task_id,
        "env_kind": episode.task.env_kind,
        "difficulty": episode.task.difficulty,
        "status": episode.status,
        "step_index": episode.step_index,
        "step_budget": episode.task.step_budget,
        "remaining_steps": episode.remaining_steps,
        "rules_revealed": session.rules_revealed,
        "actor_tag": session.actor_tag,
    }
    if observation is not None:
        view["observation"] = observation
    return view


def create_app(
    tasks: list[core.TaskSpec] | None = None,
    idle_timeout: float = DEFAULT_IDLE_TIMEOUT,
) -> FastAPI:
    app = FastAPI(title="latentbench session service")
    # the human-play client is served from another origin (file:// or a dev server)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    task_index: dict[str, core.TaskSpec] = {t.task_id: t for t in (tasks or [])}
    store = SessionStore(idle_timeout=idle_timeout)
    app.state.sessions = store
    app.state.tasks = task_index

    @app.middleware("http")
    async def sweep_sessions(request: Request, call_next):
        store.sweep()
        return await call_next(request)

    @app.get("/health")
    def health():
        return {"status": "ok", "tasks": len(task_index), "sessions": len(store)}

    @app.get("/tasks")
    def list_tasks():
        return {
            "tasks": [
                {
                    "task_id": t.task_id,
                    "env_kind": t.env_kind,
                    "difficulty": t.difficulty,
                    "step_budget": t.step_budget,
                }
                for t in task_index.values()
            ]
        }

    @app.post("/sessions")
    def create_session(body: CreateSessionRequest):
        if body.task_id is not None:
            task = task_index.get(body.task_id)
            if task is None:
                return _error(404, "task_not_found", "no such task", task_id=body.task_id)
        else:
            if body.env not in core.ENV_KINDS:
                return _error(400, "invalid_params", f"unknown env {body.env!r}")
            if body.tier not in core.DIFFICULTIES:
                return _error(400, "invalid_params", f"unknown tier {body.tier!r}")
            if body.seed is None:
                return _error(400, "invalid_params", "seed is required without task_id")
            try:
                task = curation.generate_task(
                    env=body.env,
                    tier=body.tier,
                    seed=body.seed,
                    step_budget=curation.LITE_PROFILE.step_budgets[body.env],
                    task_id=f"adhoc-{body.env}-{body.tier}-{body.seed & 0xFFFF:04x}",
                )
            except Exception as exc:  # generation rejections surface as 400s
                return _error(400, "generation_failed", str(exc))
        episode = core.create_episode(task, body.rules_revealed)
        session = store.create(episode, body.actor_tag, body.rules_revealed)
        return _session_view(session, observation=core.initial_observation(episode))

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "session_not_found", "no such session", session_id=session_id)
        with session.lock:
            session.last_active = time.time()
            episode = session.episode
            ops = core.env_ops(episode.task.env_kind)
            return _session_view(session, observation=ops.observe(episode.task.payload, episode.surface))

    @app.post("/sessions/{session_id}/step")
    def step_session(session_id: str, body: StepRequest):
        session = store.get(session_id)
        if session is None:
            return _error(404, "session_not_found", "no such session", session_id=session_id)
        with session.lock:
            session.last_active = time.time()
            episode = session.episode
            if not episode.running:
                return _error(
                    409, "session_finished", f"episode already {episode.status}",
                    status=episode.status,
                )
            ops = core.env_ops(episode.task.env_kind)
            action = ops.parse_wire_action(episode.task.payload, body.action)
            outcome = core.step(episode, action)
            return {
                "session_id": session.session_id,
                "feedback": outcome.feedback,
                "observation": outcome.observation,
                "reward": outcome.reward,
                "status": episode.status,
                "done": outcome.done,
                "success": outcome.success,
                "step_index": episode.step_index,
                "remaining_steps": episode.remaining_steps,
            }

    @app.get("/sessions/{session_id}/trace")
    def export_trace(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "session_not_found", "no such session", session_id=session_id)
        with session.lock:
            session.last_active = time.time()
            return {
                "session_id": session.session_id,
                "actor_tag": session.actor_tag,
                "created_at": session.created_at,
                "last_active": session.last_active,
                "trace": core.trace_to_wire(session.episode),
            }

    return app
