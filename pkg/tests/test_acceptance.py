"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the report lines.
"""

from __future__ import annotations

import contextlib
import time

import numpy as np
import pytest

from latentbench import baselines, core, curation, energy, harness, lights, repo, trading
from latentbench.baselines import NoOpTrader, OptimalTrader, RandomAgent, TradingStrategyAgent
from latentbench.harness import run_episode

MASTER_SEED = 20240501
K_LEARNING = ("conservative", "progressive", "correlation", "rolling", "ridge")


@contextlib.contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


def _run_value(task, agent) -> float:
    episode = core.create_episode(task)
    observation = core.initial_observation(episode)
    while episode.running:
        observation = core.step(episode, agent.act(episode, observation)).observation
    state = episode.surface
    return trading.portfolio_value(state.portfolio, state.prices)


# ---------------------------------------------------------------------------
# 1. Suite regeneration


def test_suite_regeneration_counts_budgets_solvability():
    with criterion("suite regeneration: 120 tasks, budgets 200/120/120/120, 100% solvable, < 5 min"):
        start = time.time()
        tasks = curation.sample_suite(curation.LITE_PROFILE, MASTER_SEED)
        report = curation.verify_suite(tasks)
        elapsed = time.time() - start
        assert len(tasks) == 120
        counts = {}
        for task in tasks:
            counts[task.env_kind] = counts.get(task.env_kind, 0) + 1
        assert counts == {"lights": 30, "trading": 30, "energy": 30, "repo": 30}
        budgets = {env: {t.step_budget for t in tasks if t.env_kind == env} for env in counts}
        assert budgets == {"lights": {200}, "trading": {120}, "energy": {120}, "repo": {120}}
        assert report.all_solvable, report.offenders
        assert elapsed < 300.0, f"generation+verification took {elapsed:.0f}s"


# ---------------------------------------------------------------------------
# 2. Determinism


def test_determinism_manifests_and_traces(tmp_path):
    with criterion("determinism: byte-identical manifests, task files and scripted traces"):
        for run in ("a", "b"):
            tasks = curation.sample_suite(curation.LITE_PROFILE, MASTER_SEED)
            curation.write_suite(tasks, "lite", MASTER_SEED, tmp_path / run)
        assert (tmp_path / "a" / "manifest.json").read_bytes() == (
            tmp_path / "b" / "manifest.json"
        ).read_bytes()
        for task_file in sorted((tmp_path / "a" / "tasks").iterdir()):
            assert task_file.read_bytes() == (tmp_path / "b" / "tasks" / task_file.name).read_bytes()

        sample = [t for t in curation.load_suite(tmp_path / "a")][:8]
        for task in sample:
            def trace_once() -> bytes:
                episode = core.create_episode(task)
                agent = RandomAgent(7)
                observation = core.initial_observation(episode)
                while episode.running:
                    observation = core.step(episode, agent.act(episode, observation)).observation
                return core.serialize_trace(episode)

            assert trace_once() == trace_once()


# ---------------------------------------------------------------------------
# 3. Trading tutorial replay


def test_trading_tutorial_replay():
    with criterion("trading tutorial replay: final value 110.42 +/- 0.5, profit +10.42% +/- 0.5pp"):
        config = trading.MarketConfig(
            n_stocks=2,
            n_factors=2,
            loading=((0.1, 0.2), (-0.3, 0.4)),
            initial_prices=(1.0, 2.0),
            initial_cash=100.0,
            factor_timeline=((0.10, 0.05), (-0.15, 0.10), (0.00, 0.20)),
            noise_timeline=((0.0, 0.0),) * 3,
            horizon=3,
            sigma=0.0,
        )
        task = core.TaskSpec("trading", "tutorial", 1, 3, "easy", config, "")
        episode = core.create_episode(task)
        core.step(episode, core.TradeOrder(buy={"S0": 100}))
        core.step(episode, core.TradeOrder(sell={"S0": 100}, buy={"S1": 51}))
        core.step(episode, core.TradeOrder())
        state = episode.surface
        value = trading.portfolio_value(state.portfolio, state.prices)
        profit_pp = trading.profit_rate(value, 100.0) * 100.0
        assert abs(value - 110.42) <= 0.5, value
        assert abs(profit_pp - 10.42) <= 0.5, profit_pp


# ---------------------------------------------------------------------------
# 4. Identification


def _identification_market(loading, n_factors):
    rows = [
        tuple(0.1 if k == j else 0.0 for k in range(n_factors)) for j in range(n_factors)
    ]
    rows += [tuple(0.07 if k == j % n_factors else 0.0 for k in range(n_factors)) for j in range(4)]
    d = len(loading)
    return trading.MarketConfig(
        n_stocks=d,
        n_factors=n_factors,
        loading=tuple(tuple(r) for r in loading),
        initial_prices=tuple(2.0 + i for i in range(d)),
        initial_cash=1000.0,
        factor_timeline=tuple(rows),
        noise_timeline=((0.0,) * d,) * len(rows),
        horizon=len(rows),
        sigma=0.0,
    )


def test_identification_noiseless():
    with criterion("identification: noiseless estimators recover W to 1e-6; ridge -> 0 as lambda -> 0"):
        for n_factors in (2, 3):
            loading = [
                [0.1 * (i + 1) * (1 if (i + k) % 2 else -1) for k in range(n_factors)]
                for i in range(2)
            ]
            config = _identification_market(loading, n_factors)
            task = core.TaskSpec("trading", "ident", 1, config.horizon, "easy", config, "")
            for kind in ("conservative", "progressive", "rolling", "correlation"):
                agent = TradingStrategyAgent(kind)
                _run_value(task, agent)
                error = np.abs(agent.last_loading - np.asarray(loading)).max()
                assert error <= 1e-6, f"{kind} K={n_factors}: {error}"
            errors = []
            for lam in (1.0, 1e-4, 1e-10):
                agent = TradingStrategyAgent("ridge", ridge_lambda=lam)
                _run_value(task, agent)
                errors.append(np.abs(agent.last_loading - np.asarray(loading)).max())
            assert errors[-1] <= 1e-6 and errors[0] > errors[-1]


# ---------------------------------------------------------------------------
# 5. Strategy dominance


def test_strategy_dominance_and_bruteforce_equality(lite_by_env):
    with criterion("dominance: optimal >= each strategy >= no-op on every lite trading task; optimal == brute force"):
        for task in lite_by_env["trading"]:
            optimal_value = _run_value(task, OptimalTrader())
            noop_value = _run_value(task, NoOpTrader())
            for kind in K_LEARNING:
                value = _run_value(task, TradingStrategyAgent(kind))
                assert optimal_value >= value - 1e-9, (task.task_id, kind)
                assert value >= noop_value - 1e-9, (task.task_id, kind)
            brute = _brute_force_value(task.payload)
            assert optimal_value == brute, (task.task_id, optimal_value, brute)


def _brute_force_value(config) -> float:
    """One-day-lookahead by exhaustive candidate simulation (independent path)."""
    task = core.TaskSpec("trading", "bf", 1, config.horizon, "easy", config, "")
    episode = core.create_episode(task)
    while episode.running:
        state = episode.surface
        next_prices = trading.advance_market(config, state.day, state.prices)
        best_action, best_value = None, float("-inf")
        candidates = [baselines._liquidate_action(state)]
        for i in range(config.n_stocks):
            cash = baselines._cash_after_sells(state, keep_index=i)
            quantity = baselines._affordable_shares(cash, state.prices[i])
            candidates.append(baselines._allin_action(state, i, quantity))
        for action in candidates:
            portfolio, _ = trading.step_trade(state.portfolio, state.prices, action)
            value = trading.portfolio_value(portfolio, next_prices)
            if value > best_value:
                best_action, best_value = action, value
        core.step(episode, best_action)
    state = episode.surface
    return trading.portfolio_value(state.portfolio, state.prices)


# ---------------------------------------------------------------------------
# 6. Lights oracle


def test_lights_oracle_on_lite_and_tutorial(lite_by_env):
    with criterion("lights oracle: BFS solutions execute exactly on all 30 lite tasks; tutorial minimal length 3"):
        for task in lite_by_env["lights"]:
            solution = lights.solve_bfs(task.payload)
            assert solution is not None
            bits = 0
            for display_index in solution:
                bits, _, progressed = lights.apply_toggle(bits, task.payload, display_index)
                assert progressed
            assert bits == (1 << task.payload.n_lights) - 1
        tutorial = lights.LightTaskConfig(
            n_lights=3,
            rules=(("const", True), ("var", 0), ("and", ("not", ("var", 1)), ("var", 0))),
            display_perm=(0, 1, 2),
            min_solution_length=3,
        )
        assert len(lights.solve_bfs(tutorial)) == 3


# ---------------------------------------------------------------------------
# 7. Energy generation properties


def test_energy_generation_properties(lite_by_env):
    with criterion("energy generation: spike rate in [3%,7%] over 10k days, clip ranges, exact period repetition, oracle survives, B/D exactly 4.2"):
        days = spikes = 0
        seed = 0
        while days < 10_000:
            for source, clip in (("wind", energy.WIND_CLIP), ("solar", energy.SOLAR_CLIP)):
                values, record = energy.generate_efficiency_curve(seed, source, 500)
                assert all(clip[0] <= v <= clip[1] for v in values)
                assert len(record.base_pattern) == record.period
                days += 500
                spikes += len(record.spike_days)
            seed += 1
        rate = spikes / days
        assert 0.03 <= rate <= 0.07, rate

        for task in lite_by_env["energy"]:
            config = task.payload
            for curve, values, clip in (
                (config.wind_curve, config.wind_efficiency, energy.WIND_CLIP),
                (config.solar_curve, config.solar_efficiency, energy.SOLAR_CLIP),
            ):
                period = curve.period
                spikes = dict(curve.spike_days)

                def pre_noise(t):
                    return (
                        curve.base_pattern[t % period]
                        + curve.cycle_offsets[t // period]
                        + spikes.get(t, 0.0)
                    )

                # the stored curve is the record's reconstruction plus bounded noise
                for t, value in enumerate(values):
                    if clip[0] < value < clip[1]:
                        assert abs(value - pre_noise(t)) <= 0.06, (task.task_id, t)
                # one period apart, the pre-noise level differs exactly by the
                # offset/spike deltas: the base component repeats exactly
                for t in range(config.horizon - period):
                    expected_delta = (
                        curve.cycle_offsets[(t + period) // period]
                        - curve.cycle_offsets[t // period]
                        + spikes.get(t + period, 0.0)
                        - spikes.get(t, 0.0)
                    )
                    assert pre_noise(t + period) - pre_noise(t) == pytest.approx(
                        expected_delta, abs=1e-9
                    )
            final, violations = energy.run_oracle(config)
            assert final.day == config.horizon and violations == 0
            for demand, budget in zip(config.demand_timeline, config.budget_timeline):
                assert budget / demand == 4.2
                assert budget == 4.2 * demand


# ---------------------------------------------------------------------------
# 8. Energy tutorial arithmetic


def test_energy_tutorial_arithmetic():
    with criterion("energy tutorial arithmetic: actuals sum 61, net supply 51 (exact)"):
        record = energy.CurveRecord(period=2, base_pattern=(1.0, 1.0), cycle_offsets=(0.0,), spike_days=())
        config = energy.EnergyConfig(
            horizon=1,
            demand_timeline=(40,),
            budget_timeline=(4.2 * 40,),
            thermal_efficiency=(0.9,),
            wind_efficiency=(1.1,),
            solar_efficiency=(1.0,),
            wind_curve=record,
            solar_curve=record,
        )
        _, report = energy.step_dispatch(
            energy.initial_grid_state(),
            config,
            core.DispatchCommand(thermal=10, wind=20, solar=30, battery=-10),
        )
        assert sum(report.actuals) == 61.0
        assert report.net_supply == 51.0


# ---------------------------------------------------------------------------
# 9. Repo conformance


def test_repo_tutorial_and_certification(lite_by_env):
    with criterion("repo conformance: 12-step tutorial exact feedback, brute-force certifies 30 lite tasks, order-dependence witness"):
        from test_repo import TUTORIAL_SCRIPT

        config = repo.build_tutorial_config()
        state = repo.initial_repo_state()
        for command, expected in TUTORIAL_SCRIPT:
            state, feedback, _ = repo.execute_command(state, config, core.ShellCommand(command=command))
            assert feedback == expected, (command, feedback)
        assert state.succeeded

        for task in lite_by_env["repo"]:
            assert repo.count_satisfying_assignments(task.payload, limit=1) >= 1

        witness_found = False
        for seed in range(60):
            candidate = repo.generate_repo_task(seed, 6)
            if _order_dependence_witness(candidate):
                witness_found = True
                break
        assert witness_found


def _order_dependence_witness(config) -> bool:
    force_edges = [e for e in config.edges if e.behavior in ("force_high", "force_low", "pin")]
    for edge in force_edges:
        alternatives = [v for v in config.versions[edge.dst] if v != config.ground_truth[edge.dst]]
        if not alternatives:
            continue
        a1 = f"pip install {edge.src}=={config.ground_truth[edge.src]}"
        a2 = f"pip install {edge.dst}=={alternatives[0]}"

        def final(commands):
            state = repo.initial_repo_state()
            for command in commands:
                state, _, _ = repo.execute_command(state, config, core.ShellCommand(command=command))
            return state.installed

        if final([a1, a2]) != final([a2, a1]):
            return True
    return False


# ---------------------------------------------------------------------------
# 10. Metrics definitions


def test_metrics_definitions_and_loop_ratio():
    with criterion("metrics: hand-built Avg@4/Pass@4 and best-of-4 exact; loop-ratio hand cases"):
        def success_result(task_id, run_index, success):
            return harness.EpisodeResult(
                task_id=task_id, env_kind="lights", difficulty="easy", run_index=run_index,
                status="success" if success else "budget_exhausted", success=success, steps=5,
                profit=None, final_value=None, loop_ratio=None, tokens=None,
                infrastructure_failed=False, trace={},
            )

        results = {
            "t1": [success_result("t1", i, s) for i, s in enumerate([True, False, False, False])],
            "t2": [success_result("t2", i, s) for i, s in enumerate([False, False, False, False])],
        }
        report = harness.compute_metrics(results, "lights", k=4)
        assert report.avg_at_k == pytest.approx(12.5)
        assert report.pass_at_k == pytest.approx(50.0)

        def profit_result(task_id, run_index, profit):
            return harness.EpisodeResult(
                task_id=task_id, env_kind="trading", difficulty="easy", run_index=run_index,
                status="success", success=True, steps=120, profit=profit, final_value=None,
                loop_ratio=None, tokens=None, infrastructure_failed=False, trace={},
            )

        trading_results = {
            "t1": [profit_result("t1", i, p) for i, p in enumerate([0.10, -0.05, 0.20, 0.00])],
            "t2": [profit_result("t2", i, p) for i, p in enumerate([0.02, 0.04, -0.01, 0.01])],
        }
        trading_report = harness.compute_metrics(trading_results, "trading", k=4)
        assert trading_report.avg_at_k == pytest.approx((6.25 + 1.5) / 2)
        assert trading_report.pass_at_k == pytest.approx((20.0 + 4.0) / 2)

        def rec(snapshot, index, progressed):
            return {
                "observation_snapshot": snapshot,
                "action": {"kind": "toggle", "index": index},
                "progress_flag": progressed,
                "feedback": "",
            }

        loop_records = [rec("000", 1, False), rec("000", 1, False), rec("000", 1, False), rec("100", 0, True)]
        assert harness.compute_loop_ratio(loop_records, "lights") == pytest.approx(0.75)
        clean_records = [rec("000", 1, False), rec("000", 2, False), rec("000", 1, False)]
        assert harness.compute_loop_ratio(clean_records, "lights") == 0.0


# ---------------------------------------------------------------------------
# 11. Agent-facing paths via stub adapter


class _StubRemote(harness.RemoteAdapter):
    def __init__(self, replies):
        super().__init__(endpoint="http://stub.invalid/v1", model="stub")
        self.replies = list(replies)
        self.payloads: list[dict] = []

    def _post(self, payload: dict) -> dict:
        self.payloads.append(payload)
        reply = self.replies.pop(0) if self.replies else "<action>0</action>"
        return {"choices": [{"message": {"content": reply}}], "usage": {"total_tokens": 5}}


def test_agent_facing_paths_with_stub(lite_by_env):
    with criterion("agent paths: stub adapter exercises parsing, memory windows, stop tokens, rules-revealed plumbing"):
        lights_task = lite_by_env["lights"][0]
        stub = _StubRemote(["let me try <action>1</action>", "junk reply", "<action>0</action>"])
        result = run_episode(lights_task, stub)
        assert stub.payloads[0]["stop"] == ["</action>", "</finish>"]
        kinds = [r["action"]["kind"] for r in result.trace["records"][:3]]
        assert kinds == ["toggle", "invalid", "toggle"]

        config = trading.generate_trading_task(5, horizon=70)
        trading_task = core.TaskSpec("trading", "stub-window", 5, 70, "easy", config, "rules here")
        stub = _StubRemote([])
        run_episode(trading_task, stub)
        final_prompt = stub.payloads[-1]["messages"][-1]["content"]
        assert final_prompt.count("\nAction: ") == harness.MEMORY_WINDOWS["trading"]

        revealed = _StubRemote([])
        run_episode(lights_task, revealed, rules_revealed=True)
        hidden = _StubRemote([])
        run_episode(lights_task, hidden, rules_revealed=False)
        secret_line = lights_task.rules_text.splitlines()[1]
        assert all(secret_line in p["messages"][-1]["content"] for p in revealed.payloads)
        assert all(secret_line not in p["messages"][-1]["content"] for p in hidden.payloads)


# ---------------------------------------------------------------------------
# [SECONDARY] UI contract: the browser client's captured walkthrough trace
# feeds the harness, and the trading form sign convention round-trips.


def test_ui_trace_feeds_harness():
    with criterion("[secondary] exported UI walkthrough trace: success=true, loop ratio matches the play"):
        import json
        from pathlib import Path

        fixture_path = Path(__file__).parent.parent / "frontend" / "tests" / "fixtures" / "lights_tutorial.json"
        fixture = json.loads(fixture_path.read_text())
        trace = fixture["trace"]["trace"]
        assert trace["status"] == "success"
        assert trace["records"][-1]["feedback"] == "Toggled B1 to True"
        # the play was 1 (fail), 0, 2, 1: no immediately repeated pairs
        assert harness.compute_loop_ratio(trace["records"], "lights") == 0.0

        # replaying the recorded actions through the engine reproduces the trace
        task = curation.tutorial_tasks()[0]
        episode = core.create_episode(task, rules_revealed=True)
        for record in trace["records"]:
            core.step(episode, core.ToggleAction(index=record["action"]["index"]))
        assert canonical_records(core.trace_to_wire(episode)) == canonical_records(trace)


def canonical_records(trace_doc: dict) -> str:
    from latentbench import canonical

    return canonical.dumps(trace_doc["records"])
