"""Walkthrough of the bulb-network environment.

A three-bulb network where B0 is always toggleable, B1 needs B0 on, and B2
needs B0 on with B1 off. We poke it by hand, then let the exhaustive-search
oracle find the shortest solution, and finally sample a fresh hidden network
and solve it.
"""

from latentbench import core, lights

# --- the worked three-bulb example -----------------------------------------

config = lights.LightTaskConfig(
    n_lights=3,
    rules=(
        ("const", True),                               # B0: always
        ("var", 0),                                    # B1: needs B0
        ("and", ("not", ("var", 1)), ("var", 0)),      # B2: needs B0 and not B1
    ),
    display_perm=(0, 1, 2),
    min_solution_length=3,
)

task = core.TaskSpec(
    env_kind="lights", task_id="demo-3bulb", seed=0, step_budget=200,
    difficulty="easy", payload=config, rules_text=lights.rules_text_for(config),
)
episode = core.create_episode(task)
print("initial:", core.initial_observation(episode))

for index in (1, 0, 2, 1):  # first attempt fails: B1 needs B0 on
    outcome = core.step(episode, core.ToggleAction(index=index))
    print(f"toggle {index}: {outcome.feedback:55s} state: {outcome.observation}")
print("status:", episode.status)

# --- the oracle -------------------------------------------------------------

solution = lights.solve_bfs(config)
print("\nshortest solution from all-off:", solution, f"({len(solution)} toggles)")

# --- a fresh hidden network -------------------------------------------------

hidden = lights.generate_lights_task(seed=2024, n_lights=6, min_solution_length=6)
print("\ngenerated 6-bulb network, display permutation hidden from the agent")
print(lights.rules_text_for(hidden))
print("oracle length:", len(lights.solve_bfs(hidden)))
