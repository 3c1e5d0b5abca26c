"""Play an episode through the session HTTP service.

Starts the FastAPI app in-process, creates a session on a freshly generated
bulb task with the rules revealed, solves it with the exhaustive-search
oracle, and exports the trace in the same schema the harness consumes.
"""

from fastapi.testclient import TestClient

from latentbench import curation, harness, lights
from latentbench.service import create_app

tasks = [
    curation.generate_task("lights", "easy", seed=42, step_budget=200, task_id="demo-lights")
]
app = create_app(tasks=tasks)
client = TestClient(app)

print("health:", client.get("/health").json())
print("tasks:", client.get("/tasks").json())

session = client.post(
    "/sessions",
    json={"task_id": "demo-lights", "rules_revealed": True, "actor_tag": "demo"},
).json()
sid = session["session_id"]
print(f"\nsession {sid}: {session['remaining_steps']} steps remaining")
print(session["observation"].splitlines()[-1], "<- current bulbs")

solution = lights.solve_bfs(tasks[0].payload)
print(f"oracle solution: {solution}")
for index in solution:
    step = client.post(f"/sessions/{sid}/step", json={"action": index}).json()
    print(f"  toggle {index}: {step['feedback']:30s} -> {step['observation']}")
print("status:", step["status"])

exported = client.get(f"/sessions/{sid}/trace").json()
ratio = harness.compute_loop_ratio(exported["trace"]["records"], "lights")
print(f"\nexported trace: {len(exported['trace']['records'])} records, "
      f"actor {exported['actor_tag']}, loop ratio {ratio:.2f}")
