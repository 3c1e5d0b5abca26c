"""Walkthrough of the grid-dispatch environment.

Shows the rated-vs-actual arithmetic on a single day, the layered structure of
a renewable efficiency curve (periodic base, per-cycle offsets, rare spikes,
daily noise), and the certifying dispatcher surviving a full generated task.
"""

from latentbench import core, energy

# --- one day of dispatch arithmetic ------------------------------------------

record = energy.CurveRecord(period=2, base_pattern=(1.0, 1.0), cycle_offsets=(0.0,), spike_days=())
single_day = energy.EnergyConfig(
    horizon=1, demand_timeline=(40,), budget_timeline=(4.2 * 40,),
    thermal_efficiency=(0.9,), wind_efficiency=(1.1,), solar_efficiency=(1.0,),
    wind_curve=record, solar_curve=record,
)
state, report = energy.step_dispatch(
    energy.initial_grid_state(), single_day,
    core.DispatchCommand(thermal=10, wind=20, solar=30, battery=-10),
)
print("rated (10, 20, 30) at efficiencies (0.9, 1.1, 1.0), battery charging 10:")
print(f"  actuals {report.actuals} -> total {sum(report.actuals):g}")
print(f"  net supply {report.net_supply:g} (battery absorbed 10), state of charge {state.state_of_charge:g}")
print(f"  cost {report.cost:g} vs budget {report.budget:g}")

# --- the hidden efficiency curve ----------------------------------------------

values, curve = energy.generate_efficiency_curve(rng=11, source="wind", horizon=120)
print(f"\nwind curve: period {curve.period} days, "
      f"{len(curve.cycle_offsets)} cycles, {len(curve.spike_days)} spike days")
print("  base pattern (one period):", [round(v, 3) for v in curve.base_pattern[:8]], "...")
print("  first two cycles differ by the offset delta:",
      round(curve.cycle_offsets[1] - curve.cycle_offsets[0], 4))
print("  first 10 realized days:", [round(v, 3) for v in values[:10]])

# --- a certified task and its oracle ------------------------------------------

config = energy.generate_energy_task(seed=5, horizon=120, tau_carbon=0.80, tau_stability=0.6)
final, violations = energy.run_oracle(config)
print(f"\ngenerated 120-day task: demand {min(config.demand_timeline)}-{max(config.demand_timeline)} MW, "
      f"targets carbon < {config.tau_carbon}, stability > {config.tau_stability}")
print(f"certifying dispatcher: {final.day} days survived, {violations} violations, "
      f"carbon {energy.carbon_ratio(final):.4f}, mean stability {energy.mean_stability(final):.3f}")
