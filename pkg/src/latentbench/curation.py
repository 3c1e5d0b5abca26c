"""Suite assembly: difficulty-stratified sampling, certification, manifests.

The lite profile is 30 tasks per environment (10 per tier) with budgets
200/120/120/120; the challenge profile is 10 hard tasks per environment with
1200-step budgets. Every task seed derives from (master_seed, env, index), so
a suite regenerates byte-identically from the manifest's master seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from . import canonical, core, energy, lights, repo, trading
from .rng import RngStream, derive_seed

SUITE_FORMAT_VERSION = 1


class CurationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SuiteProfile:
    name: str
    tier_counts: dict[str, dict[str, int]]  # env -> tier -> count
    step_budgets: dict[str, int]  # env -> budget
    horizons: dict[str, int]  # trading/energy day horizons


LITE_PROFILE = SuiteProfile(
    name="lite",
    tier_counts={env: {"easy": 10, "medium": 10, "hard": 10} for env in core.ENV_KINDS},
    step_budgets={"lights": 200, "trading": 120, "energy": 120, "repo": 120},
    horizons={"trading": 120, "energy": 120},
)

CHALLENGE_PROFILE = SuiteProfile(
    name="challenge",
    tier_counts={env: {"hard": 10} for env in core.ENV_KINDS},
    step_budgets={env: 1200 for env in core.ENV_KINDS},
    horizons={"trading": 1200, "energy": 1200},
)

PROFILES = {"lite": LITE_PROFILE, "challenge": CHALLENGE_PROFILE}

# parameter ranges per environment tier
LIGHTS_TIERS = {
    "easy": {"n_lights": (4, 6), "length_factor": 1.0, "density": 0.45, "not_probability": 0.30},
    "medium": {"n_lights": (7, 9), "length_factor": 1.0, "density": 0.60, "not_probability": 0.35},
    "hard": {"n_lights": (10, 12), "length_factor": 1.5, "density": 0.75, "not_probability": 0.45},
}
TRADING_TIERS = {
    "easy": {"n_stocks": 2, "n_factors": 2, "sparsity": 0.0},
    "medium": {"n_stocks": 3, "n_factors": 2, "sparsity": 0.2},
    "hard": {"n_stocks": 3, "n_factors": 3, "sparsity": 0.3},
}
ENERGY_TIERS = {
    "easy": {"tau_carbon": (0.84, 0.90), "tau_stability": (0.45, 0.55)},
    "medium": {"tau_carbon": (0.80, 0.84), "tau_stability": (0.55, 0.62)},
    "hard": {"tau_carbon": (0.76, 0.80), "tau_stability": (0.62, 0.68)},
}
REPO_TIERS = {
    "easy": {"n_packages": (3, 4)},
    "medium": {"n_packages": (5, 6)},
    "hard": {"n_packages": (7, 8)},
}

CHALLENGE_OVERRIDES = {
    "lights": {"n_lights": (12, 14), "length_factor": 1.5, "density": 0.75, "not_probability": 0.45},
    "repo": {"n_packages": (8, 10)},
    "trading_price_range": (8.0, 20.0),
}


def generate_task(
    env: str,
    tier: str,
    seed: int,
    step_budget: int,
    task_id: str,
    profile: SuiteProfile = LITE_PROFILE,
) -> core.TaskSpec:
    """One certified task; all randomness flows from the given seed."""
    params = RngStream(seed, "params")
    if env == "lights":
        table = CHALLENGE_OVERRIDES["lights"] if profile.name == "challenge" else LIGHTS_TIERS[tier]
        n = params.randint(*table["n_lights"])
        min_length = math.ceil(table["length_factor"] * n)
        config = lights.generate_lights_task(
            seed,
            n_lights=n,
            operator_mix=(1.0, 1.0, table["not_probability"]),
            density=table["density"],
            min_solution_length=min_length,
        )
        rules = lights.rules_text_for(config)
    elif env == "trading":
        table = TRADING_TIERS[tier]
        price_range = (
            CHALLENGE_OVERRIDES["trading_price_range"] if profile.name == "challenge" else (1.0, 6.0)
        )
        config = trading.generate_trading_task(
            seed,
            n_stocks=table["n_stocks"],
            n_factors=table["n_factors"],
            sparsity=table["sparsity"],
            horizon=profile.horizons["trading"],
            price_range=price_range,
        )
        rules = trading.rules_text_for(config)
    elif env == "energy":
        table = ENERGY_TIERS[tier]
        tau_c = trading.quantize2(params.uniform(*table["tau_carbon"]))
        tau_s = trading.quantize2(params.uniform(*table["tau_stability"]))
        config = energy.generate_energy_task(
            seed,
            horizon=profile.horizons["energy"],
            tau_carbon=tau_c,
            tau_stability=tau_s,
        )
        rules = energy.rules_text_for(config)
    elif env == "repo":
        table = CHALLENGE_OVERRIDES["repo"] if profile.name == "challenge" else REPO_TIERS[tier]
        n = params.randint(*table["n_packages"])
        config = repo.generate_repo_task(seed, n_packages=n)
        if repo.count_satisfying_assignments(config, limit=1) == 0:
            raise CurationError(f"{task_id}: solution-first generation produced no solution")
        rules = repo.rules_text_for(config)
    else:
        raise CurationError(f"unknown environment '{env}'")

    return core.TaskSpec(
        env_kind=env,
        task_id=task_id,
        seed=seed,
        step_budget=step_budget,
        difficulty=tier,
        payload=config,
        rules_text=rules,
    )


def sample_suite(profile: SuiteProfile, master_seed: int) -> list[core.TaskSpec]:
    tasks: list[core.TaskSpec] = []
    for env in core.ENV_KINDS:
        index = 0
        for tier in ("easy", "medium", "hard"):
            count = profile.tier_counts.get(env, {}).get(tier, 0)
            for i in range(count):
                task_id = f"{profile.name}-{env}-{tier}-{i:02d}"
                last_error: Exception | None = None
                for attempt in range(5):
                    seed = derive_seed(master_seed, env, str(index), f"attempt{attempt}")
                    try:
                        tasks.append(
                            generate_task(env, tier, seed, profile.step_budgets[env], task_id, profile)
                        )
                        break
                    except (
                        lights.GenerationError,
                        trading.GenerationError,
                        energy.GenerationError,
                        repo.GenerationError,
                        CurationError,
                    ) as exc:
                        last_error = exc
                else:
                    raise CurationError(f"generation failed for {env}/{tier}: {last_error}")
                index += 1
    return tasks


# ---------------------------------------------------------------------------
# Verification


@dataclass(frozen=True)
class TaskVerification:
    task_id: str
    env_kind: str
    difficulty: str
    solvable: bool
    detail: str
    oracle_measure: float  # solution length / min price / oracle carbon / solutions found


@dataclass(frozen=True)
class VerificationReport:
    entries: list[TaskVerification]

    @property
    def all_solvable(self) -> bool:
        return all(e.solvable for e in self.entries)

    @property
    def offenders(self) -> list[str]:
        return [e.task_id for e in self.entries if not e.solvable]

    def oracle_lengths(self, env: str) -> dict[str, list[float]]:
        by_tier: dict[str, list[float]] = {}
        for e in self.entries:
            if e.env_kind == env:
                by_tier.setdefault(e.difficulty, []).append(e.oracle_measure)
        return by_tier


def verify_task(task: core.TaskSpec) -> TaskVerification:
    env = task.env_kind
    if env == "lights":
        solution = lights.solve_bfs(task.payload)
        ok = solution is not None and len(solution) >= task.payload.min_solution_length
        if ok:
            bits = 0
            for index in solution:
                bits, _, progressed = lights.apply_toggle(bits, task.payload, index)
                ok = ok and progressed
            ok = ok and bits == (1 << task.payload.n_lights) - 1
        measure = float(len(solution)) if solution is not None else -1.0
        detail = f"bfs length {measure:g}" if solution is not None else "unreachable goal"
    elif env == "trading":
        lowest = trading.min_path_price(task.payload)
        ok = lowest > 0
        measure = lowest
        detail = f"min path price {lowest:.4f}"
    elif env == "energy":
        final, violations = energy.run_oracle(task.payload)
        ok = (
            final.day == task.payload.horizon
            and violations == 0
            and energy.carbon_ratio(final) < task.payload.tau_carbon
            and energy.mean_stability(final) > task.payload.tau_stability
        )
        measure = energy.carbon_ratio(final)
        detail = (
            f"oracle days {final.day}/{task.payload.horizon}, violations {violations}, "
            f"carbon {measure:.4f} (< {task.payload.tau_carbon:g}), "
            f"stability {energy.mean_stability(final):.3f} (> {task.payload.tau_stability:g})"
        )
    elif env == "repo":
        solutions = repo.count_satisfying_assignments(task.payload, limit=1)
        ok = solutions >= 1
        if ok:
            episode = core.create_episode(task)
            for command in repo.ground_truth_command_script(task.payload):
                outcome = core.step(episode, core.ShellCommand(command=command))
            ok = outcome.success
        measure = float(len(task.payload.packages))
        detail = f"satisfying assignment found: {bool(solutions)}; ground-truth replay success: {ok}"
    else:
        raise CurationError(f"unknown environment '{env}'")
    return TaskVerification(
        task_id=task.task_id,
        env_kind=env,
        difficulty=task.difficulty,
        solvable=ok,
        detail=detail,
        oracle_measure=measure,
    )


def verify_suite(tasks: list[core.TaskSpec]) -> VerificationReport:
    return VerificationReport(entries=[verify_task(task) for task in tasks])


# ---------------------------------------------------------------------------
# Persistence


def manifest_for(tasks: list[core.TaskSpec], profile_name: str, master_seed: int) -> dict:
    return {
        "format_version": SUITE_FORMAT_VERSION,
        "suite": profile_name,
        "master_seed": master_seed,
        "tasks": [
            {
                "task_id": t.task_id,
                "env_kind": t.env_kind,
                "seed": t.seed,
                "difficulty": t.difficulty,
                "step_budget": t.step_budget,
                "file": f"tasks/{t.task_id}.json",
            }
            for t in tasks
        ],
    }


def write_suite(
    tasks: list[core.TaskSpec], profile_name: str, master_seed: int, out_dir: str | Path
) -> Path:
    out = Path(out_dir)
    (out / "tasks").mkdir(parents=True, exist_ok=True)
    manifest = manifest_for(tasks, profile_name, master_seed)
    (out / "manifest.json").write_bytes(canonical.dump_bytes(manifest))
    for task in tasks:
        (out / "tasks" / f"{task.task_id}.json").write_bytes(core.serialize_task(task))
    return out / "manifest.json"


def load_suite(suite_dir: str | Path) -> list[core.TaskSpec]:
    root = Path(suite_dir)
    manifest = canonical.loads((root / "manifest.json").read_bytes())
    tasks = []
    for entry in manifest["tasks"]:
        tasks.append(core.deserialize_task((root / entry["file"]).read_bytes()))
    return tasks


def tutorial_tasks() -> list[core.TaskSpec]:
    """The four worked-example tasks used by the human-play tutorial mode.

    Their hidden rules are the documented walkthrough configurations, so
    clients may show the rules while teaching the interaction loop.
    """
    lights_config = lights.LightTaskConfig(
        n_lights=3,
        rules=(("const", True), ("var", 0), ("and", ("not", ("var", 1)), ("var", 0))),
        display_perm=(0, 1, 2),
        min_solution_length=3,
    )
    trading_config = trading.MarketConfig(
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
    wind_curve = energy.CurveRecord(
        period=2, base_pattern=(1.05, 1.0), cycle_offsets=(0.0,) * 3, spike_days=()
    )
    solar_curve = energy.CurveRecord(
        period=3, base_pattern=(0.9, 1.0, 1.1), cycle_offsets=(0.0,) * 2, spike_days=()
    )
    energy_config = energy.EnergyConfig(
        horizon=6,
        demand_timeline=(100,) * 6,
        budget_timeline=tuple(energy.BUDGET_FACTOR * 100 for _ in range(6)),
        thermal_efficiency=(1.0, 1.0, 1.0, 0.9, 1.1, 1.0),
        wind_efficiency=(1.05, 1.0, 1.05, 1.0, 1.05, 1.0),
        solar_efficiency=(0.9, 1.0, 1.1, 0.9, 1.0, 1.1),
        wind_curve=wind_curve,
        solar_curve=solar_curve,
    )
    repo_config = repo.build_tutorial_config()
    return [
        core.TaskSpec("lights", "tutorial-lights", 0, 200, "easy", lights_config,
                      lights.rules_text_for(lights_config)),
        core.TaskSpec("trading", "tutorial-trading", 0, 3, "easy", trading_config,
                      trading.rules_text_for(trading_config)),
        core.TaskSpec("energy", "tutorial-energy", 0, 6, "easy", energy_config,
                      energy.rules_text_for(energy_config)),
        core.TaskSpec("repo", "tutorial-repo", 0, 120, "easy", repo_config,
                      repo.rules_text_for(repo_config)),
    ]


def describe_suite(tasks: list[core.TaskSpec]) -> str:
    lines = [f"{len(tasks)} tasks"]
    by_env: dict[str, list[core.TaskSpec]] = {}
    for task in tasks:
        by_env.setdefault(task.env_kind, []).append(task)
    for env in core.ENV_KINDS:
        group = by_env.get(env, [])
        if not group:
            continue
        tiers = {}
        for t in group:
            tiers[t.difficulty] = tiers.get(t.difficulty, 0) + 1
        tier_text = ", ".join(f"{k}: {v}" for k, v in sorted(tiers.items()))
        budgets = sorted({t.step_budget for t in group})
        lines.append(f"  {env}: {len(group)} tasks ({tier_text}), step budget {budgets}")
    return "\n".join(lines)
