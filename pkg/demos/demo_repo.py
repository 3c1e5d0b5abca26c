"""Walkthrough of the dependency-repo environment.

Replays the three-package walkthrough command by command (every error message
is a clue about a hidden constraint), then generates a larger task and shows
its ground-truth install sequence plus a pair of installs whose order changes
the final state.
"""

from latentbench import core, repo

# --- the walkthrough ----------------------------------------------------------

config = repo.build_tutorial_config()
print("hidden rules (revealed for the demo):")
print(repo.rules_text_for(config))
print()

state = repo.initial_repo_state()
for command in [
    "pip install python==3.10",
    "python run.py",
    "pip install pkg1==1.0",
    "python run.py",
    "pip install pkg2==2.0",
    "python run.py",        # ABI mismatch: pkg2 major must match pkg1
    "pip install pkg2==1.2",
    "python run.py",
    "pip install pkg3==0.1",
    "python run.py",        # exact-match violation against pkg1
    "pip install pkg3==1.0",
    "python run.py",
]:
    state, feedback, _ = repo.execute_command(state, config, core.ShellCommand(command=command))
    print(f"$ {command}\n  {feedback.splitlines()[0]}")
print("episode solved:", state.succeeded)

# --- a generated task -----------------------------------------------------------

generated = repo.generate_repo_task(seed=3, n_packages=6)
print(f"\ngenerated task: {len(generated.packages)} packages, "
      f"{len(generated.edges)} constraint edges, bases {generated.base_libraries}")
print("ground-truth install sequence (reverse topological order is always safe):")
for command in repo.ground_truth_command_script(generated):
    print("  $", command)

# side effects make installs order-dependent
force_edges = [e for e in generated.edges if e.behavior in ("force_high", "force_low", "pin")]
if force_edges:
    edge = force_edges[0]
    print(f"\norder dependence: installing {edge.src} {edge.behavior}s {edge.dst}, "
          "so installing them in the other order can leave a different version behind")
