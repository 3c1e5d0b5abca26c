from __future__ import annotations

import json

import pytest

from latentbench import baselines, core, harness, trading
from latentbench.harness import (
    MEMORY_WINDOWS,
    STOP_SEQUENCES,
    EpisodeResult,
    RemoteAdapter,
    ScriptedAdapter,
    compute_loop_ratio,
    compute_metrics,
    parse_action_tag,
    run_episode,
    run_suite,
)


class StubRemote(RemoteAdapter):
    """Canned-response endpoint; records every prompt it is sent."""

    def __init__(self, replies):
        super().__init__(endpoint="http://stub.invalid/v1/chat", model="stub")
        self.replies = list(replies)
        self.prompts: list[str] = []
        self.request_payloads: list[dict] = []

    def _post(self, payload: dict) -> dict:
        self.request_payloads.append(payload)
        self.prompts.append(payload["messages"][-1]["content"])
        reply = self.replies.pop(0) if self.replies else "<action>0</action>"
        return {
            "choices": [{"message": {"content": reply}}],
            "usage": {"total_tokens": 17},
        }


class FailingRemote(RemoteAdapter):
    def __init__(self):
        super().__init__(endpoint="http://stub.invalid/v1/chat", model="down", max_retries=2)

    def _post(self, payload: dict) -> dict:
        import httpx

        raise httpx.ConnectError("connection refused")


def lights_task(lite_by_env):
    return lite_by_env["lights"][0]


class TestParseActionTag:
    def test_lights_integer(self, lite_by_env):
        task = lights_task(lite_by_env)
        action = parse_action_tag("I will try <action>3</action>", "lights", task.payload)
        assert action == core.ToggleAction(index=3)

    def test_trading_object(self, lite_by_env):
        task = lite_by_env["trading"][0]
        text = '<action>{"buy": {"S0": 10, "S2": 20}, "sell": {"S1": 10}}</action>'
        action = parse_action_tag(text, "trading", task.payload)
        assert action == core.TradeOrder(buy={"S0": 10, "S2": 20}, sell={"S1": 10})

    def test_unquoted_keys_repaired(self, lite_by_env):
        task = lite_by_env["trading"][0]
        text = "<action>{buy: {S0: 5}, sell: {}}</action>"
        action = parse_action_tag(text, "trading", task.payload)
        assert action == core.TradeOrder(buy={"S0": 5}, sell={})

    def test_last_tag_wins(self, lite_by_env):
        task = lights_task(lite_by_env)
        text = "<action>1</action> hmm, better: <action>2</action>"
        assert parse_action_tag(text, "lights", task.payload) == core.ToggleAction(index=2)

    def test_unclosed_tag_from_stop_token(self, lite_by_env):
        # generation halts at the stop sequence, leaving the tag open
        task = lights_task(lite_by_env)
        assert parse_action_tag("thinking... <action>4", "lights", task.payload) == core.ToggleAction(4)

    def test_missing_tag_is_format_error(self, lite_by_env):
        task = lights_task(lite_by_env)
        action = parse_action_tag("no tags here", "lights", task.payload)
        assert isinstance(action, core.InvalidAction)

    def test_malformed_json_is_format_error(self, lite_by_env):
        task = lite_by_env["energy"][0]
        action = parse_action_tag("<action>{thermal: }</action>", "energy", task.payload)
        assert isinstance(action, core.InvalidAction)

    def test_energy_dispatch_object(self, lite_by_env):
        task = lite_by_env["energy"][0]
        text = '<action>{"thermal": 400.0, "wind": 10, "solar": 35.0, "battery": -15.0}</action>'
        action = parse_action_tag(text, "energy", task.payload)
        assert action == core.DispatchCommand(thermal=400.0, wind=10.0, solar=35.0, battery=-15.0)

    def test_repo_command_string(self, lite_by_env):
        task = lite_by_env["repo"][0]
        action = parse_action_tag("<action>pip install pkg0==2.1</action>", "repo", task.payload)
        assert action == core.ShellCommand(command="pip install pkg0==2.1")


class TestPromptAssembly:
    def test_stop_sequences_sent(self, lite_by_env):
        task = lights_task(lite_by_env)
        stub = StubRemote(["<action>0</action>"] * 3)
        run_episode(task, stub)
        assert stub.request_payloads[0]["stop"] == list(STOP_SEQUENCES)
        assert stub.request_payloads[0]["temperature"] == 0.6

    def test_rules_revealed_only_when_enabled(self, lite_by_env):
        task = lights_task(lite_by_env)
        hidden = StubRemote([])
        run_episode(task, hidden, rules_revealed=False)
        revealed = StubRemote([])
        run_episode(task, revealed, rules_revealed=True)
        marker = "Ground-Truth Rules"
        assert all(marker not in p for p in hidden.prompts[:5])
        assert all(marker in p for p in revealed.prompts[:5])
        assert task.rules_text.splitlines()[1] in revealed.prompts[0]

    def test_trading_window_limits_history(self):
        config = trading.generate_trading_task(3, horizon=80)
        task = core.TaskSpec("trading", "win", 3, 80, "easy", config, "rules")
        stub = StubRemote([])
        run_episode(task, stub)
        last_prompt = stub.prompts[-1]
        window = MEMORY_WINDOWS["trading"]
        assert last_prompt.count("\nAction: ") == window

    def test_lights_history_unlimited(self, lite_by_env):
        task = lights_task(lite_by_env)
        stub = StubRemote([])
        run_episode(task, stub)
        assert stub.prompts[-1].count("Action: ") == task.step_budget - 1

    def test_unparseable_output_consumes_step(self, lite_by_env):
        task = lights_task(lite_by_env)
        stub = StubRemote(["gibberish without a tag", "<action>0</action>"])
        result = run_episode(task, stub)
        first = result.trace["records"][0]
        assert first["action"]["kind"] == "invalid"
        assert "Invalid action format" in first["feedback"]
        assert result.steps == task.step_budget  # episode still ran to budget

    def test_infrastructure_failure_excluded(self, lite_by_env):
        task = lights_task(lite_by_env)
        result = run_episode(task, FailingRemote())
        assert result.infrastructure_failed
        report = compute_metrics({task.task_id: [result]}, "lights", k=1)
        assert report.n_tasks == 0
        assert report.excluded_runs == 1


class TestScriptedRuns:
    def test_optimal_completes_horizon(self, lite_by_env):
        task = lite_by_env["trading"][0]
        result = run_episode(task, ScriptedAdapter(baselines.OptimalTrader()))
        assert result.status == "success"
        assert result.steps == 120
        assert result.profit is not None

    def test_replay_reproduces_trace(self, lite_by_env):
        task = lite_by_env["repo"][1]

        def once():
            adapter = ScriptedAdapter(baselines.RandomAgent(99))
            return run_episode(task, adapter).trace

        from latentbench import canonical

        assert canonical.dumps(once()) == canonical.dumps(once())


class TestMetrics:
    def test_success_definitions_hand_matrix(self):
        def fake(task_id, run_index, success):
            return EpisodeResult(
                task_id=task_id, env_kind="lights", difficulty="easy", run_index=run_index,
                status="success" if success else "budget_exhausted", success=success,
                steps=10, profit=None, final_value=None, loop_ratio=None, tokens=None,
                infrastructure_failed=False, trace={},
            )

        results = {
            "t1": [fake("t1", i, s) for i, s in enumerate([True, False, False, False])],
            "t2": [fake("t2", i, s) for i, s in enumerate([False, False, False, False])],
        }
        report = compute_metrics(results, "lights", k=4)
        assert report.avg_at_k == pytest.approx((25.0 + 0.0) / 2)
        assert report.pass_at_k == pytest.approx((100.0 + 0.0) / 2)
        assert report.per_task["t1"]["avg"] == 25.0
        assert report.per_task["t1"]["pass"] == 100.0

    def test_trading_best_of_k(self):
        def fake(task_id, run_index, profit):
            return EpisodeResult(
                task_id=task_id, env_kind="trading", difficulty="easy", run_index=run_index,
                status="success", success=True, steps=120, profit=profit, final_value=None,
                loop_ratio=None, tokens=None, infrastructure_failed=False, trace={},
            )

        results = {
            "t1": [fake("t1", i, p) for i, p in enumerate([0.10, -0.05, 0.20, 0.00])],
            "t2": [fake("t2", i, p) for i, p in enumerate([0.02, 0.04, -0.01, 0.01])],
        }
        report = compute_metrics(results, "trading", k=4)
        assert report.avg_at_k == pytest.approx(((10 - 5 + 20 + 0) / 4 + (2 + 4 - 1 + 1) / 4) / 2)
        assert report.pass_at_k == pytest.approx((20.0 + 4.0) / 2)

    def test_pass_at_k_nondecreasing_in_k(self):
        def fake(task_id, run_index, success):
            return EpisodeResult(
                task_id=task_id, env_kind="lights", difficulty="easy", run_index=run_index,
                status="success" if success else "budget_exhausted", success=success,
                steps=3, profit=None, final_value=None, loop_ratio=None, tokens=None,
                infrastructure_failed=False, trace={},
            )

        outcomes = {"t1": [False, False, True, False], "t2": [False, True, False, True]}
        previous = 0.0
        for k in range(1, 5):
            nested = {
                task_id: [fake(task_id, i, s) for i, s in enumerate(flags[:k])]
                for task_id, flags in outcomes.items()
            }
            report = compute_metrics(nested, "lights", k=k)
            assert report.pass_at_k >= previous
            previous = report.pass_at_k

    def test_run_suite_parallelism_matches_sequential(self, lite_by_env):
        task = lite_by_env["lights"][0]

        def factory(t, run_index):
            return ScriptedAdapter(baselines.RandomAgent(run_index + 11))

        sequential = run_suite([task], factory, k=2, parallelism=1)
        parallel = run_suite([task], factory, k=2, parallelism=4)
        from latentbench import canonical

        for a, b in zip(sequential[task.task_id], parallel[task.task_id]):
            assert canonical.dumps(a.trace) == canonical.dumps(b.trace)

    def test_ragged_run_counts_rejected(self):
        def fake(task_id, run_index):
            return EpisodeResult(
                task_id=task_id, env_kind="lights", difficulty="easy", run_index=run_index,
                status="success", success=True, steps=1, profit=None, final_value=None,
                loop_ratio=None, tokens=None, infrastructure_failed=False, trace={},
            )

        results = {"t1": [fake("t1", 0)], "t2": [fake("t2", 0), fake("t2", 1)]}
        with pytest.raises(ValueError):
            compute_metrics(results, "lights", k=2)


def _record(snapshot, action, progressed):
    return {
        "observation_snapshot": snapshot,
        "action": action,
        "progress_flag": progressed,
        "feedback": "",
    }


class TestLoopRatio:
    def test_three_noops_then_other(self):
        records = [
            _record("000", {"kind": "toggle", "index": 1}, False),
            _record("000", {"kind": "toggle", "index": 1}, False),
            _record("000", {"kind": "toggle", "index": 1}, False),
            _record("100", {"kind": "toggle", "index": 0}, True),
        ]
        assert compute_loop_ratio(records, "lights") == pytest.approx(0.75)

    def test_no_consecutive_repeats(self):
        records = [
            _record("000", {"kind": "toggle", "index": 1}, False),
            _record("000", {"kind": "toggle", "index": 2}, False),
            _record("000", {"kind": "toggle", "index": 1}, False),
        ]
        assert compute_loop_ratio(records, "lights") == 0.0

    def test_progressing_repeats_not_loops(self):
        records = [
            _record("100", {"kind": "toggle", "index": 0}, True),
            _record("110", {"kind": "toggle", "index": 0}, True),
            _record("111", {"kind": "toggle", "index": 0}, True),
        ]
        assert compute_loop_ratio(records, "lights") == 0.0

    def test_env_restriction(self):
        with pytest.raises(ValueError):
            compute_loop_ratio([], "trading")


class TestExport:
    def test_rows_and_summary_files(self, tmp_path, lite_by_env):
        task = lite_by_env["trading"][0]
        results = run_suite([task], lambda t, i: ScriptedAdapter(baselines.NoOpTrader()), k=2)
        rows, summary = harness.export_results(results, tmp_path, "trading", k=2)
        lines = rows.read_text().strip().splitlines()
        assert len(lines) == 1 + 2  # header + 1 task x 2 runs
        doc = json.loads(summary.read_text())
        assert doc["env_kind"] == "trading"
        assert doc["n_tasks"] == 1
