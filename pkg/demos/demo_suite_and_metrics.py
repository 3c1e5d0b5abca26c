"""Suite curation, scripted evaluation runs, and metric aggregation.

Samples the standard 120-task lite suite from one master seed, verifies every
task's solvability oracle, runs seeded random agents k=4 times per task on one
environment, and aggregates Avg@4 / Pass@4, loop ratios, and the step
histogram exactly as the harness does for remote models.
"""

import time

from latentbench import curation, harness
from latentbench.baselines import RandomAgent
from latentbench.harness import ScriptedAdapter

start = time.time()
tasks = curation.sample_suite(curation.LITE_PROFILE, master_seed=20240501)
report = curation.verify_suite(tasks)
print(f"sampled + certified {len(tasks)} tasks in {time.time() - start:.1f}s; "
      f"all solvable: {report.all_solvable}")
print(curation.describe_suite(tasks))

lights_tasks = [t for t in tasks if t.env_kind == "lights"][:6]
print(f"\nrandom agent, k=4, on {len(lights_tasks)} lights tasks:")
results = harness.run_suite(
    lights_tasks,
    adapter_factory=lambda task, run: ScriptedAdapter(RandomAgent(task.seed ^ run)),
    k=4,
)
metrics = harness.compute_metrics(results, "lights", k=4)
print(f"  Avg@4 {metrics.avg_at_k:.2f}  Pass@4 {metrics.pass_at_k:.2f}")
print(f"  mean loop ratio {metrics.mean_loop_ratio:.3f}")
print(f"  step histogram (steps: runs): {metrics.step_histogram}")

# difficulty audit from the verification report
lengths = curation.verify_suite([t for t in tasks if t.env_kind == "lights"]).oracle_lengths("lights")
print("\noracle solution lengths by tier:")
for tier in ("easy", "medium", "hard"):
    values = sorted(lengths[tier])
    print(f"  {tier:6s} min {values[0]:.0f}  median {values[len(values) // 2]:.0f}  max {values[-1]:.0f}")
