"""Evaluation loop: agent adapters, prompt assembly, action parsing, metrics.

Remote adapters speak a chat-completion style HTTP API and receive one
rendered prompt per step: the environment's template filled with a windowed
action/feedback history and the current observation (ground-truth rules are
inserted only in rules-revealed mode). Generation stops at the action/finish
closing tags; the last well-formed action tag in the reply wins. Unparseable
replies consume a step with format-error feedback so step accounting stays
comparable across agents.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import httpx

from . import canonical, core, trading

log = logging.getLogger(__name__)

MEMORY_WINDOWS: dict[str, int | None] = {
    "trading": 50,
    "energy": 40,
    "lights": None,
    "repo": None,
}
STOP_SEQUENCES = ("</action>", "</finish>")
DEFAULT_TEMPERATURE = 0.6

_ACTION_TAG = re.compile(r"<action>(.*?)</action>", re.DOTALL)
_BARE_KEY = re.compile(r"([{,]\s*)([A-Za-z_][A-Za-z0-9_]*)(\s*:)")


class AdapterError(RuntimeError):
    """Remote endpoint unreachable or persistently failing."""


# ---------------------------------------------------------------------------
# Prompt assembly


def _template(env_kind: str) -> str:
    return resources.files("latentbench.prompts").joinpath(f"{env_kind}.txt").read_text("utf-8")


@dataclass(frozen=True)
class HistoryRecord:
    observation: str  # observation the agent saw before acting
    action_text: str
    feedback: str
    observation_after: str


def action_text(action: core.AgentAction) -> str:
    if isinstance(action, core.ToggleAction):
        return str(action.index)
    if isinstance(action, core.TradeOrder):
        return json.dumps({"buy": action.buy, "sell": action.sell}, sort_keys=True)
    if isinstance(action, core.DispatchCommand):
        return json.dumps(
            {
                "thermal": action.thermal,
                "wind": action.wind,
                "solar": action.solar,
                "battery": action.battery,
            }
        )
    if isinstance(action, core.ShellCommand):
        return action.command
    return f"<invalid: {action.reason}>"


def format_history(env_kind: str, records: list[HistoryRecord]) -> str:
    if not records:
        return "(no interactions yet)"
    if env_kind == "lights":
        return "\n".join(
            f"Action: {r.action_text}, Feedback: {r.feedback}, State: {r.observation_after}"
            for r in records
        )
    if env_kind in ("trading", "energy"):
        return "\n\n".join(f"{r.observation}\nAction: {r.action_text}" for r in records)
    # repo: step-numbered command/feedback blocks
    blocks = []
    for n, r in enumerate(records, start=1):
        blocks.append(f"=== Step {n} ===\n>>> Command: {r.action_text}\nFeedback: {r.feedback}")
    return "\n\n".join(blocks)


def build_prompt(
    env_kind: str,
    observation: str,
    records: list[HistoryRecord],
    rules_text: str | None = None,
) -> str:
    window = MEMORY_WINDOWS[env_kind]
    visible = records if window is None else records[len(records) - window:]
    rules_section = ""
    if rules_text:
        rules_section = f"\n### Ground-Truth Rules (revealed mode):\n{rules_text}\n"
    return _template(env_kind).format(
        rules_section=rules_section,
        history=format_history(env_kind, visible),
        observation=observation,
    )


# ---------------------------------------------------------------------------
# Action parsing


def _parse_json_object(text: str):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        repaired = _BARE_KEY.sub(r'\1"\2"\3', text)
        return json.loads(repaired)


def parse_action_tag(text: str, env_kind: str, payload) -> core.AgentAction:
    """Extract the last well-formed action region and parse the env grammar."""
    matches = _ACTION_TAG.findall(text)
    candidate = None
    if matches:
        candidate = matches[-1].strip()
    elif "<action>" in text:
        # generation stopped at the closing tag; take the trailing open region
        candidate = text.rsplit("<action>", 1)[1].strip()
    if candidate is None:
        return core.InvalidAction(reason="no <action> tag found", raw=text[-200:])
    ops = core.env_ops(env_kind)
    if env_kind == "lights":
        return ops.parse_wire_action(payload, candidate)
    if env_kind in ("trading", "energy"):
        try:
            wire = _parse_json_object(candidate)
        except json.JSONDecodeError as exc:
            return core.InvalidAction(reason=f"malformed action JSON: {exc.msg}", raw=candidate)
        return ops.parse_wire_action(payload, wire)
    return ops.parse_wire_action(payload, candidate)


# ---------------------------------------------------------------------------
# Adapters


class ScriptedAdapter:
    """Wraps a scripted agent with direct access to the episode state."""

    kind = "scripted"

    def __init__(self, agent, name: str = "scripted"):
        self.agent = agent
        self.name = name

    def decide(self, episode: core.EpisodeState, observation: str, records: list[HistoryRecord]):
        return self.agent.act(episode, observation), None


class RemoteAdapter:
    """Chat-completion style HTTP endpoint; sees only prompts, never state."""

    kind = "remote"

    def __init__(
        self,
        endpoint: str,
        model: str,
        temperature: float = DEFAULT_TEMPERATURE,
        headers: dict[str, str] | None = None,
        timeout: float = 120.0,
        max_retries: int = 3,
    ):
        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.headers = headers or {}
        self.timeout = timeout
        self.max_retries = max_retries
        self.name = model

    def _post(self, payload: dict) -> dict:
        response = httpx.post(
            self.endpoint, json=payload, headers=self.headers, timeout=self.timeout
        )
        response.raise_for_status()
        return response.json()

    def complete(self, prompt: str) -> tuple[str, int | None]:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
            "stop": list(STOP_SEQUENCES),
        }
        last_error: Exception | None = None
        for _ in range(self.max_retries):
            try:
                doc = self._post(payload)
                text = doc["choices"][0]["message"]["content"]
                usage = doc.get("usage", {})
                tokens = usage.get("total_tokens")
                return text, tokens
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
        raise AdapterError(f"endpoint failed after {self.max_retries} attempts: {last_error}")

    def decide(self, episode: core.EpisodeState, observation: str, records: list[HistoryRecord]):
        task = episode.task
        rules = task.rules_text if episode.rules_revealed else None
        prompt = build_prompt(task.env_kind, observation, records, rules)
        text, tokens = self.complete(prompt)
        action = parse_action_tag(text, task.env_kind, task.payload)
        return action, tokens


# ---------------------------------------------------------------------------
# Episode driving


@dataclass
class EpisodeResult:
    task_id: str
    env_kind: str
    difficulty: str
    run_index: int
    status: str
    success: bool
    steps: int
    profit: float | None  # trading only
    final_value: float | None
    loop_ratio: float | None
    tokens: int | None
    infrastructure_failed: bool
    trace: dict


def run_episode(
    task: core.TaskSpec,
    adapter,
    rules_revealed: bool = False,
    run_index: int = 0,
) -> EpisodeResult:
    episode = core.create_episode(task, rules_revealed)
    observation = core.initial_observation(episode)
    records: list[HistoryRecord] = []
    tokens_used = 0
    saw_tokens = False
    infrastructure_failed = False

    while episode.running:
        try:
            action, tokens = adapter.decide(episode, observation, records)
        except AdapterError as exc:
            log.warning("episode %s run %d: %s", task.task_id, run_index, exc)
            infrastructure_failed = True
            break
        if tokens is not None:
            tokens_used += tokens
            saw_tokens = True
        outcome = core.step(episode, action)
        records.append(
            HistoryRecord(
                observation=observation,
                action_text=action_text(action),
                feedback=outcome.feedback,
                observation_after=outcome.observation,
            )
        )
        observation = outcome.observation

    profit = None
    final_value = None
    if task.env_kind == "trading":
        state = episode.surface
        final_value = trading.portfolio_value(state.portfolio, state.prices)
        profit = trading.profit_rate(final_value, task.payload.initial_cash)
    trace = core.trace_to_wire(episode)
    loop = None
    if task.env_kind in ("lights", "repo") and not infrastructure_failed:
        loop = compute_loop_ratio(trace["records"], task.env_kind)
    return EpisodeResult(
        task_id=task.task_id,
        env_kind=task.env_kind,
        difficulty=task.difficulty,
        run_index=run_index,
        status=episode.status,
        success=episode.status == "success",
        steps=episode.step_index,
        profit=profit,
        final_value=final_value,
        loop_ratio=loop,
        tokens=tokens_used if saw_tokens else None,
        infrastructure_failed=infrastructure_failed,
        trace=trace,
    )


def run_suite(
    tasks: list[core.TaskSpec],
    adapter_factory,
    k: int = 4,
    rules_revealed: bool = False,
    parallelism: int = 1,
) -> dict[str, list[EpisodeResult]]:
    """adapter_factory(task, run_index) -> adapter; fresh state per run.

    Episodes are independent and may run concurrently up to ``parallelism``;
    each episode's adapter conversation stays strictly sequential.
    """
    jobs = [(task, run_index) for task in tasks for run_index in range(k)]

    def one(job) -> EpisodeResult:
        task, run_index = job
        adapter = adapter_factory(task, run_index)
        return run_episode(task, adapter, rules_revealed, run_index)

    if parallelism <= 1:
        outcomes = [one(job) for job in jobs]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(one, jobs))

    results: dict[str, list[EpisodeResult]] = {task.task_id: [] for task in tasks}
    for result in outcomes:
        results[result.task_id].append(result)
    for runs in results.values():
        runs.sort(key=lambda r: r.run_index)
    return results


# ---------------------------------------------------------------------------
# Metrics


@dataclass
class MetricsReport:
    env_kind: str
    k: int
    n_tasks: int
    avg_at_k: float  # percent (success envs) or mean profit percent (trading)
    pass_at_k: float  # percent, or mean best-run profit percent for trading
    per_task: dict[str, dict] = field(default_factory=dict)
    mean_loop_ratio: float | None = None
    step_histogram: dict[int, int] = field(default_factory=dict)
    total_tokens: int | None = None
    excluded_runs: int = 0


def compute_metrics(results: dict[str, list[EpisodeResult]], env_kind: str, k: int = 4) -> MetricsReport:
    per_task: dict[str, dict] = {}
    avg_values: list[float] = []
    pass_values: list[float] = []
    loops: list[float] = []
    histogram: dict[int, int] = {}
    total_tokens = 0
    saw_tokens = False
    excluded = 0

    for task_id, runs in sorted(results.items()):
        usable = [r for r in runs if not r.infrastructure_failed]
        excluded += len(runs) - len(usable)
        if len(usable) != len(runs):
            log.warning("task %s: excluding %d infrastructure-failed runs", task_id, len(runs) - len(usable))
        if not usable:
            continue
        if env_kind == "trading":
            profits = [r.profit * 100.0 for r in usable]
            task_avg = sum(profits) / len(profits)
            task_pass = max(profits)
            per_task[task_id] = {"profits": profits, "avg": task_avg, "best": task_pass}
        else:
            successes = [1.0 if r.success else 0.0 for r in usable]
            task_avg = 100.0 * sum(successes) / len(successes)
            task_pass = 100.0 if any(successes) else 0.0
            per_task[task_id] = {"successes": successes, "avg": task_avg, "pass": task_pass}
        avg_values.append(task_avg)
        pass_values.append(task_pass)
        for r in usable:
            histogram[r.steps] = histogram.get(r.steps, 0) + 1
            if r.loop_ratio is not None:
                loops.append(r.loop_ratio)
            if r.tokens is not None:
                total_tokens += r.tokens
                saw_tokens = True

    lengths = {len(runs) for runs in results.values()}
    if len(lengths) > 1:
        raise ValueError(f"ragged run counts per task: {sorted(lengths)}")

    n = len(per_task)
    return MetricsReport(
        env_kind=env_kind,
        k=k,
        n_tasks=n,
        avg_at_k=sum(avg_values) / n if n else 0.0,
        pass_at_k=sum(pass_values) / n if n else 0.0,
        per_task=per_task,
        mean_loop_ratio=sum(loops) / len(loops) if loops else None,
        step_histogram=dict(sorted(histogram.items())),
        total_tokens=total_tokens if saw_tokens else None,
        excluded_runs=excluded,
    )


def compute_loop_ratio(records: list[dict], env_kind: str) -> float:
    """Fraction of actions inside immediately repeated, non-progressing
    (state, action) runs of length >= 2."""
    if env_kind not in ("lights", "repo"):
        raise ValueError(f"loop ratio is defined for lights/repo, not '{env_kind}'")
    if not records:
        return 0.0

    if env_kind == "lights":
        initial_snapshot = "0" * len(records[0]["observation_snapshot"])
    else:
        initial_snapshot = {"installed": {}, "python": None, "succeeded": False}

    def state_key(i: int):
        if i == 0:
            return canonical.dumps(initial_snapshot)
        return canonical.dumps(records[i - 1]["observation_snapshot"])

    keys = [
        (state_key(i), canonical.dumps(rec["action"]))
        for i, rec in enumerate(records)
    ]
    progressed = [bool(rec["progress_flag"]) for rec in records]

    loop_actions = 0
    i = 0
    while i < len(keys):
        j = i + 1
        while j < len(keys) and keys[j] == keys[i]:
            j += 1
        block = j - i
        if block >= 2 and not any(progressed[i:j]):
            loop_actions += block
        i = j
    return loop_actions / len(records)


# ---------------------------------------------------------------------------
# Export


def export_results(
    results: dict[str, list[EpisodeResult]], out_dir: str | Path, env_kind: str, k: int = 4
) -> tuple[Path, Path]:
    """One CSV row per task x run, plus a JSON summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows_path = out / "results.csv"
    summary_path = out / "summary.json"

    with rows_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["task_id", "env_kind", "difficulty", "run_index", "status", "success",
             "steps", "profit", "loop_ratio", "tokens", "infrastructure_failed"]
        )
        for task_id in sorted(results):
            for r in results[task_id]:
                writer.writerow(
                    [r.task_id, r.env_kind, r.difficulty, r.run_index, r.status,
                     int(r.success), r.steps,
                     "" if r.profit is None else f"{r.profit:.6f}",
                     "" if r.loop_ratio is None else f"{r.loop_ratio:.6f}",
                     "" if r.tokens is None else r.tokens,
                     int(r.infrastructure_failed)]
                )

    report = compute_metrics(results, env_kind, k)
    summary = {
        "env_kind": report.env_kind,
        "k": report.k,
        "n_tasks": report.n_tasks,
        "avg_at_k": report.avg_at_k,
        "pass_at_k": report.pass_at_k,
        "mean_loop_ratio": report.mean_loop_ratio,
        "step_histogram": {str(k_): v for k_, v in report.step_histogram.items()},
        "total_tokens": report.total_tokens,
        "excluded_runs": report.excluded_runs,
    }
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True))
    return rows_path, summary_path
