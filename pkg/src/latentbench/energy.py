"""Four-source grid dispatch under latent periodic efficiencies.

Rated commands for thermal/wind/solar are modulated by hidden per-day
efficiency vectors; the battery moves energy across days (efficiency exactly
1). Renewable efficiencies follow a layered construction: a piecewise-linear
base pattern repeating with a hidden period, per-cycle offsets, rare per-day
spikes, daily Gaussian noise, then clipping to the source's physical range.
The construction record is stored next to the realized curve so the periodic
component can be verified without reverse-engineering noise.

Demand days are whole MW and budgets are exactly ``4.2 * demand``. Battery
bookkeeping is kept on a 1e-6 MWh grid so charge/discharge round trips return
the state of charge exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from . import core
from .canonical import round9
from .rng import RngStream

THERMAL_CAPACITY = 600.0
WIND_CAPACITY = 350.0
SOLAR_CAPACITY = 250.0
BATTERY_CAPACITY = 80.0

THERMAL_COST = 3.0
WIND_COST = 5.0
SOLAR_COST = 6.0
BATTERY_COST = 0.1

BUDGET_FACTOR = 4.2
VIOLATION_LIMIT = 3

RAMP_SCALE = 1280.0  # total generation capacity plus battery
VIOLATION_PENALTY = 0.5

WIND_CLIP = (0.6, 1.05)
SOLAR_CLIP = (0.65, 1.1)
THERMAL_CLIP = (0.9, 1.1)
SPIKE_PROBABILITY = 0.05
PERIOD_RANGE = (15, 25)

DEFAULT_TAU_CARBON = 0.81
DEFAULT_TAU_STABILITY = 0.5

DEMAND_RANGE = (400, 900)


class GenerationError(RuntimeError):
    """Rejection budget exhausted while sampling a feasible grid task."""


def micro6(x: float) -> float:
    """Snap battery bookkeeping onto the 1e-6 MWh grid."""
    return round(x, 6)


@dataclass(frozen=True)
class CurveRecord:
    """Construction record of one renewable efficiency curve."""

    period: int
    base_pattern: tuple[float, ...]  # one period of the pre-noise base
    cycle_offsets: tuple[float, ...]
    spike_days: tuple[tuple[int, float], ...]  # (day, magnitude)


@dataclass(frozen=True)
class EnergyConfig:
    horizon: int
    demand_timeline: tuple[int, ...]  # whole MW
    budget_timeline: tuple[float, ...]  # exactly 4.2 * demand
    thermal_efficiency: tuple[float, ...]
    wind_efficiency: tuple[float, ...]
    solar_efficiency: tuple[float, ...]
    wind_curve: CurveRecord
    solar_curve: CurveRecord
    tau_carbon: float = DEFAULT_TAU_CARBON
    tau_stability: float = DEFAULT_TAU_STABILITY
    violation_limit: int = VIOLATION_LIMIT
    battery_capacity: float = BATTERY_CAPACITY
    capacities: tuple[float, float, float] = (THERMAL_CAPACITY, WIND_CAPACITY, SOLAR_CAPACITY)
    unit_costs: tuple[float, float, float, float] = (THERMAL_COST, WIND_COST, SOLAR_COST, BATTERY_COST)
    ramp_scale: float = RAMP_SCALE
    violation_penalty: float = VIOLATION_PENALTY


@dataclass(frozen=True)
class DailyReport:
    day: int
    rated: tuple[float, float, float]
    actuals: tuple[float, float, float]
    battery_flow: float  # executed, negative = charge
    net_supply: float
    demand: float
    cost: float
    budget: float
    demand_violation: bool
    budget_violation: bool
    stability_day: float
    mean_stability: float
    carbon: float
    state_of_charge: float
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class GridState:
    day: int
    state_of_charge: float
    consecutive_violations: int
    cumulative_thermal_actual: float
    cumulative_renewable_actual: float
    stability_samples: tuple[float, ...]
    previous_action: tuple[float, float, float, float] | None
    last_report: DailyReport | None = None


def mean_stability(state: GridState) -> float:
    if not state.stability_samples:
        return 1.0
    return sum(state.stability_samples) / len(state.stability_samples)


def carbon_ratio(state: GridState) -> float:
    total = state.cumulative_thermal_actual + state.cumulative_renewable_actual
    if total <= 0:
        return 0.0
    return state.cumulative_thermal_actual / total


def compute_stability(
    previous_action: tuple[float, float, float, float] | None,
    action: tuple[float, float, float, float],
    violated: bool,
    config: EnergyConfig,
) -> float:
    ramp = 0.0
    if previous_action is not None:
        ramp = sum(abs(a - b) for a, b in zip(action, previous_action))
    value = 1.0 - ramp / config.ramp_scale - (config.violation_penalty if violated else 0.0)
    return min(1.0, max(0.0, value))


def step_dispatch(
    state: GridState, config: EnergyConfig, action: core.DispatchCommand
) -> tuple[GridState, DailyReport]:
    if state.day >= config.horizon:
        raise core.StateError(f"day {state.day} is beyond horizon {config.horizon}")
    t = state.day
    warnings: list[str] = []

    rated = []
    for name, requested, cap in (
        ("thermal", action.thermal, config.capacities[0]),
        ("wind", action.wind, config.capacities[1]),
        ("solar", action.solar, config.capacities[2]),
    ):
        value = float(requested)
        if value < 0.0 or value > cap:
            clamped = min(max(value, 0.0), cap)
            warnings.append(f"{name} rated {value:g} clamped to {clamped:g}")
            value = clamped
        rated.append(value)
    thermal_rated, wind_rated, solar_rated = rated

    efficiencies = (
        config.thermal_efficiency[t],
        config.wind_efficiency[t],
        config.solar_efficiency[t],
    )
    actuals = tuple(r * e for r, e in zip(rated, efficiencies))
    total_actual = sum(actuals)

    flow = float(action.battery)
    if flow < 0.0:  # charging
        headroom = micro6(config.battery_capacity - state.state_of_charge)
        charge = min(micro6(-flow), headroom)
        if charge < -flow:
            warnings.append(f"battery charge {-flow:g} truncated to {charge:g} (capacity)")
        discharge = 0.0
    elif flow > 0.0:
        discharge = min(micro6(flow), state.state_of_charge)
        if discharge < flow:
            warnings.append(f"battery discharge {flow:g} truncated to {discharge:g} (state of charge)")
        charge = 0.0
    else:
        charge = discharge = 0.0
    executed_flow = micro6(discharge - charge)
    soc = micro6(state.state_of_charge + charge - discharge)

    net_supply = total_actual - charge + discharge
    cost = (
        thermal_rated * config.unit_costs[0]
        + wind_rated * config.unit_costs[1]
        + solar_rated * config.unit_costs[2]
        + abs(executed_flow) * config.unit_costs[3]
    )

    demand = float(config.demand_timeline[t])
    budget = config.budget_timeline[t]
    demand_violation = net_supply < demand
    budget_violation = cost > budget
    violated = demand_violation or budget_violation

    executed = (thermal_rated, wind_rated, solar_rated, executed_flow)
    stability_day = compute_stability(state.previous_action, executed, violated, config)

    new_state = GridState(
        day=t + 1,
        state_of_charge=soc,
        consecutive_violations=state.consecutive_violations + 1 if violated else 0,
        cumulative_thermal_actual=state.cumulative_thermal_actual + actuals[0],
        cumulative_renewable_actual=state.cumulative_renewable_actual + actuals[1] + actuals[2],
        stability_samples=state.stability_samples + (stability_day,),
        previous_action=executed,
    )
    report = DailyReport(
        day=t,
        rated=(thermal_rated, wind_rated, solar_rated),
        actuals=actuals,
        battery_flow=executed_flow,
        net_supply=net_supply,
        demand=demand,
        cost=cost,
        budget=budget,
        demand_violation=demand_violation,
        budget_violation=budget_violation,
        stability_day=stability_day,
        mean_stability=mean_stability(new_state),
        carbon=carbon_ratio(new_state),
        state_of_charge=soc,
        warnings=tuple(warnings),
    )
    return replace(new_state, last_report=report), report


def check_termination_and_success(state: GridState, config: EnergyConfig) -> str:
    if state.consecutive_violations >= config.violation_limit:
        return "failure"
    if state.day >= config.horizon:
        ok = mean_stability(state) > config.tau_stability and carbon_ratio(state) < config.tau_carbon
        return "success" if ok else "failure"
    return "running"


# ---------------------------------------------------------------------------
# Generation


def generate_efficiency_curve(
    rng: RngStream | int,
    source: str,
    horizon: int,
    forbidden_period: int | None = None,
) -> tuple[tuple[float, ...], CurveRecord]:
    """Layered renewable efficiency curve plus its construction record."""
    if source == "wind":
        clip_lo, clip_hi = WIND_CLIP
    elif source == "solar":
        clip_lo, clip_hi = SOLAR_CLIP
    else:
        raise core.ConfigError(f"source: expected wind or solar, got '{source}'")
    stream = rng if isinstance(rng, RngStream) else RngStream(rng, f"curve/{source}")

    period = stream.randint(*PERIOD_RANGE)
    while forbidden_period is not None and period == forbidden_period:
        period = stream.randint(*PERIOD_RANGE)
    if horizon < 2 * period:
        raise core.ConfigError(f"horizon: need at least two cycles ({2 * period}), got {horizon}")

    # base levels stay inside the clip range so offsets and noise stay informative
    level_lo = clip_lo + 0.05
    level_hi = clip_hi - 0.05
    base: list[float] = []
    level = stream.uniform(level_lo, level_hi)
    while len(base) < period:
        segment = stream.randint(2, 5)
        target = stream.uniform(level_lo, level_hi)
        for j in range(segment):
            if len(base) >= period:
                break
            base.append(round9(level + (target - level) * (j + 1) / segment))
        level = target

    n_cycles = math.ceil(horizon / period)
    offsets = tuple(round9(stream.uniform(-0.06, 0.06)) for _ in range(n_cycles))

    spikes: list[tuple[int, float]] = []
    spike_by_day: dict[int, float] = {}
    for day in range(horizon):
        if stream.random() < SPIKE_PROBABILITY:
            magnitude = round9(stream.choice([-1.0, 1.0]) * stream.uniform(0.08, 0.2))
            spikes.append((day, magnitude))
            spike_by_day[day] = magnitude

    values = []
    for day in range(horizon):
        raw = (
            base[day % period]
            + offsets[day // period]
            + spike_by_day.get(day, 0.0)
            + stream.normal(0.0, 0.01)
        )
        values.append(round9(min(clip_hi, max(clip_lo, raw))))

    record = CurveRecord(
        period=period,
        base_pattern=tuple(base),
        cycle_offsets=offsets,
        spike_days=tuple(spikes),
    )
    return tuple(values), record


def _max_affordable_supply(budget: float, e_th: float, e_w: float, e_s: float) -> float:
    """Greedy cheapest-per-actual-MW fill; used to keep every demand day coverable."""
    sources = sorted(
        (
            (THERMAL_COST / e_th, THERMAL_CAPACITY, e_th),
            (WIND_COST / e_w, WIND_CAPACITY, e_w),
            (SOLAR_COST / e_s, SOLAR_CAPACITY, e_s),
        )
    )
    supply = 0.0
    remaining = budget
    for cost_per_actual, capacity, eff in sources:
        unit_cost = cost_per_actual * eff  # back to cost per rated MW
        rated = min(capacity, remaining / unit_cost if unit_cost > 0 else capacity)
        supply += rated * eff
        remaining -= rated * unit_cost
        if remaining <= 0:
            break
    return supply


def _sample_demand(
    rng: RngStream,
    horizon: int,
    e_th: tuple[float, ...],
    e_w: tuple[float, ...],
    e_s: tuple[float, ...],
) -> tuple[int, ...]:
    """Smooth bounded walk, capped so each day stays coverable within budget."""
    lo, hi = DEMAND_RANGE
    demand: list[int] = []
    level = rng.randint(lo + 50, hi - 200)
    for t in range(horizon):
        level = min(hi, max(lo, level + rng.randint(-40, 40)))
        day_value = level
        while day_value > lo:
            budget = BUDGET_FACTOR * day_value
            if _max_affordable_supply(0.97 * budget, e_th[t], e_w[t], e_s[t]) >= 1.04 * day_value:
                break
            day_value -= 10
        demand.append(day_value)
    return tuple(demand)


def oracle_dispatch(config: EnergyConfig) -> list[core.DispatchCommand]:
    """Perfect-information greedy dispatcher used to certify feasibility.

    Meets demand with margin each day, spends strictly inside budget, and
    steers cumulative carbon toward ``tau_carbon`` minus a safety margin by
    buying renewables cheapest-actual-first.
    """
    plans: list[core.DispatchCommand] = []
    cum_thermal = 0.0
    cum_renewable = 0.0
    carbon_goal = max(0.05, config.tau_carbon - 0.04)
    for t in range(config.horizon):
        demand = float(config.demand_timeline[t])
        budget = 0.97 * config.budget_timeline[t]
        e_th = config.thermal_efficiency[t]
        e_w = config.wind_efficiency[t]
        e_s = config.solar_efficiency[t]
        target = 1.03 * demand + 5.0

        # renewable actual needed to keep cumulative carbon under the goal
        total_after = cum_thermal + cum_renewable + target
        needed_renewable = max(0.0, (1.0 - carbon_goal) * total_after - cum_renewable)
        # thermal cannot cover everything alone when demand is high
        forced_renewable = max(0.0, target - THERMAL_CAPACITY * e_th)
        want_renewable = max(needed_renewable, forced_renewable)
        # bank cheap renewable generation on high-efficiency days
        running_carbon = cum_thermal / (cum_thermal + cum_renewable) if t else 1.0
        if running_carbon > carbon_goal - 0.05:
            opportunistic = 0.0
            if e_w >= 0.92:
                opportunistic += WIND_CAPACITY * e_w
            if e_s >= 0.95:
                opportunistic += SOLAR_CAPACITY * e_s
            want_renewable = max(want_renewable, min(opportunistic, target))

        ordered = sorted(((WIND_COST / e_w, "wind"), (SOLAR_COST / e_s, "solar")))
        wind_rated = solar_rated = 0.0
        got = 0.0
        for _, name in ordered:
            if got >= want_renewable:
                break
            if name == "wind":
                add = min(WIND_CAPACITY, (want_renewable - got) / e_w)
                wind_rated = add
                got += add * e_w
            else:
                add = min(SOLAR_CAPACITY, (want_renewable - got) / e_s)
                solar_rated = add
                got += add * e_s

        def total_cost(w: float, s: float) -> float:
            residual = max(0.0, target - w * e_w - s * e_s)
            thermal = min(THERMAL_CAPACITY, residual / e_th)
            return THERMAL_COST * thermal + WIND_COST * w + SOLAR_COST * s

        # shrink discretionary renewables until the day fits in budget
        scale = 1.0
        while scale > 0.0 and total_cost(wind_rated * scale, solar_rated * scale) > budget:
            renewable_actual = (wind_rated * e_w + solar_rated * e_s) * scale
            if renewable_actual <= forced_renewable + 1e-9:
                break
            scale -= 0.02
        wind_rated *= max(scale, 0.0)
        solar_rated *= max(scale, 0.0)

        residual = max(0.0, target - wind_rated * e_w - solar_rated * e_s)
        thermal_rated = min(THERMAL_CAPACITY, residual / e_th)

        plans.append(
            core.DispatchCommand(
                thermal=thermal_rated, wind=wind_rated, solar=solar_rated, battery=0.0
            )
        )
        cum_thermal += thermal_rated * e_th
        cum_renewable += wind_rated * e_w + solar_rated * e_s
    return plans


def run_oracle(config: EnergyConfig) -> tuple[GridState, int]:
    """Run the certifying dispatcher; returns final state and violation-day count."""
    state = initial_grid_state()
    violations = 0
    for command in oracle_dispatch(config):
        state, report = step_dispatch(state, config, command)
        if report.demand_violation or report.budget_violation:
            violations += 1
        if check_termination_and_success(state, config) == "failure":
            break
    return state, violations


def initial_grid_state() -> GridState:
    return GridState(
        day=0,
        state_of_charge=0.0,
        consecutive_violations=0,
        cumulative_thermal_actual=0.0,
        cumulative_renewable_actual=0.0,
        stability_samples=(),
        previous_action=None,
    )


def rules_text_for(config: EnergyConfig) -> str:
    lines = [
        "Grid dynamics: actual generation = rated command x that day's efficiency.",
        f"Wind efficiency repeats a base pattern with period {config.wind_curve.period} days "
        f"(plus per-cycle offsets, rare spikes, and daily noise), clipped to {WIND_CLIP}.",
        f"Solar efficiency has period {config.solar_curve.period} days, clipped to {SOLAR_CLIP}.",
        f"Thermal efficiency fluctuates near 1 within {THERMAL_CLIP}; battery efficiency is exactly 1.",
        f"Unit costs per rated MW: thermal {config.unit_costs[0]:g}, wind {config.unit_costs[1]:g}, "
        f"solar {config.unit_costs[2]:g}; battery flow costs {config.unit_costs[3]:g} per MW moved.",
        f"Budget each day is exactly {BUDGET_FACTOR} x demand. "
        f"Success needs mean stability > {config.tau_stability:g} and carbon < {config.tau_carbon:g}.",
        "Per-day efficiencies (day: thermal, wind, solar):",
    ]
    for t in range(config.horizon):
        lines.append(
            f"{t + 1}: {config.thermal_efficiency[t]:.3f}, "
            f"{config.wind_efficiency[t]:.3f}, {config.solar_efficiency[t]:.3f}"
        )
    return "\n".join(lines)


def generate_energy_task(
    seed: int,
    horizon: int = 120,
    tau_carbon: float = DEFAULT_TAU_CARBON,
    tau_stability: float = DEFAULT_TAU_STABILITY,
    max_attempts: int = 60,
) -> EnergyConfig:
    """Sample demand/budget/efficiency timelines certified by the oracle."""
    rng = RngStream(seed, "energy")
    for attempt in range(max_attempts):
        stream = rng.substream(f"attempt{attempt}")
        wind_values, wind_record = generate_efficiency_curve(
            stream.substream("wind"), "wind", horizon
        )
        solar_values, solar_record = generate_efficiency_curve(
            stream.substream("solar"), "solar", horizon, forbidden_period=wind_record.period
        )
        thermal_stream = stream.substream("thermal")
        thermal = tuple(
            round9(min(THERMAL_CLIP[1], max(THERMAL_CLIP[0], thermal_stream.normal(1.0, 0.02))))
            for _ in range(horizon)
        )
        demand = _sample_demand(
            stream.substream("demand"), horizon, thermal, wind_values, solar_values
        )
        budgets = tuple(BUDGET_FACTOR * d for d in demand)
        for d, b in zip(demand, budgets):
            if b / d != BUDGET_FACTOR:  # exactness guard; holds for whole-MW demand
                raise GenerationError(f"budget ratio drifted for demand {d}")
        config = EnergyConfig(
            horizon=horizon,
            demand_timeline=demand,
            budget_timeline=budgets,
            thermal_efficiency=thermal,
            wind_efficiency=wind_values,
            solar_efficiency=solar_values,
            wind_curve=wind_record,
            solar_curve=solar_record,
            tau_carbon=tau_carbon,
            tau_stability=tau_stability,
        )
        final, violations = run_oracle(config)
        if (
            final.day == horizon
            and violations == 0
            and carbon_ratio(final) < tau_carbon - 0.01
            and mean_stability(final) > tau_stability + 0.03
        ):
            return config
    raise GenerationError(
        f"no feasible grid task after {max_attempts} attempts "
        f"(tau_carbon={tau_carbon}, tau_stability={tau_stability})"
    )


# ---------------------------------------------------------------------------
# Engine wiring


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _validate_payload(payload) -> None:
    if not isinstance(payload, EnergyConfig):
        raise core.ConfigError(f"payload: expected EnergyConfig, got {type(payload).__name__}")
    h = payload.horizon
    if h < 1:
        raise core.ConfigError("horizon: must be positive")
    for name, timeline in (
        ("demand_timeline", payload.demand_timeline),
        ("budget_timeline", payload.budget_timeline),
        ("thermal_efficiency", payload.thermal_efficiency),
        ("wind_efficiency", payload.wind_efficiency),
        ("solar_efficiency", payload.solar_efficiency),
    ):
        if len(timeline) != h:
            raise core.ConfigError(f"{name}: expected {h} entries, got {len(timeline)}")
    for d, b in zip(payload.demand_timeline, payload.budget_timeline):
        if b != BUDGET_FACTOR * d:
            raise core.ConfigError(f"budget_timeline: entry {b} is not {BUDGET_FACTOR} * {d}")
    if sum(payload.capacities) <= max(payload.demand_timeline):
        raise core.ConfigError("capacities: total capacity must exceed peak demand")
    for value in payload.wind_efficiency:
        if not WIND_CLIP[0] <= value <= WIND_CLIP[1]:
            raise core.ConfigError(f"wind_efficiency: {value} outside {WIND_CLIP}")
    for value in payload.solar_efficiency:
        if not SOLAR_CLIP[0] <= value <= SOLAR_CLIP[1]:
            raise core.ConfigError(f"solar_efficiency: {value} outside {SOLAR_CLIP}")


def _initial_surface(payload: EnergyConfig) -> GridState:
    return initial_grid_state()


def _transition(payload: EnergyConfig, state: GridState, action) -> tuple[GridState, str, bool, None]:
    new_state, report = step_dispatch(state, payload, action)
    parts = []
    if report.warnings:
        parts.append("WARNING: " + "; ".join(report.warnings))
    flow = report.battery_flow
    battery_text = (
        f"charged {_fmt(-flow)}" if flow < 0 else f"discharged {_fmt(flow)}" if flow > 0 else "idle"
    )
    parts.append(
        f"Day {report.day + 1} results: actuals thermal={_fmt(report.actuals[0])} "
        f"wind={_fmt(report.actuals[1])} solar={_fmt(report.actuals[2])} | battery {battery_text} | "
        f"net supply={_fmt(report.net_supply)} vs demand={_fmt(report.demand)} | "
        f"cost={_fmt(report.cost)} vs budget={_fmt(report.budget)} | "
        f"demand violation={'yes' if report.demand_violation else 'no'}, "
        f"budget violation={'yes' if report.budget_violation else 'no'} | "
        f"stability(day)={report.stability_day:.3f} | carbon(cum)={report.carbon:.4f} | "
        f"state of charge={_fmt(report.state_of_charge)}/{_fmt(payload.battery_capacity)}"
    )
    return new_state, " ".join(parts), True, None


def _evaluate(payload: EnergyConfig, state: GridState, step_index: int, budget: int) -> str:
    return check_termination_and_success(state, payload)


def _observe(payload: EnergyConfig, state: GridState) -> str:
    if state.day >= payload.horizon:
        verdict = check_termination_and_success(state, payload)
        return (
            f"Horizon complete after {payload.horizon} days. "
            f"Mean stability={mean_stability(state):.3f} (target > {payload.tau_stability:g}), "
            f"carbon={carbon_ratio(state):.4f} (target < {payload.tau_carbon:g}) -> {verdict}."
        )
    t = state.day
    lines = [
        f"Day {t + 1} of {payload.horizon} | state of charge: "
        f"{_fmt(state.state_of_charge)}/{_fmt(payload.battery_capacity)} MWh | "
        f"mean stability: {mean_stability(state):.3f} (target > {payload.tau_stability:g}) | "
        f"carbon: {carbon_ratio(state):.4f} (target < {payload.tau_carbon:g}) | "
        f"consecutive violations: {state.consecutive_violations}/{payload.violation_limit}"
    ]
    lines.append(f"Today's demand: {payload.demand_timeline[t]:d} MW | today's budget: {payload.budget_timeline[t]:.1f}")
    if t + 1 < payload.horizon:
        lines.append(f"Tomorrow's budget: {payload.budget_timeline[t + 1]:.1f}")
    return "\n".join(lines)


def _snapshot(payload: EnergyConfig, state: GridState):
    return {
        "day": state.day,
        "state_of_charge": round9(state.state_of_charge),
        "consecutive_violations": state.consecutive_violations,
        "cumulative_thermal": round9(state.cumulative_thermal_actual),
        "cumulative_renewable": round9(state.cumulative_renewable_actual),
        "mean_stability": round9(mean_stability(state)),
        "carbon": round9(carbon_ratio(state)),
    }


def _curve_to_wire(record: CurveRecord) -> dict:
    return {
        "period": record.period,
        "base_pattern": list(record.base_pattern),
        "cycle_offsets": list(record.cycle_offsets),
        "spike_days": [[day, magnitude] for day, magnitude in record.spike_days],
    }


def _curve_from_wire(doc: dict) -> CurveRecord:
    return CurveRecord(
        period=int(doc["period"]),
        base_pattern=tuple(float(x) for x in doc["base_pattern"]),
        cycle_offsets=tuple(float(x) for x in doc["cycle_offsets"]),
        spike_days=tuple((int(d), float(m)) for d, m in doc["spike_days"]),
    )


def _payload_to_wire(payload: EnergyConfig) -> dict:
    # budget_timeline is exactly BUDGET_FACTOR * demand and is rederived on
    # load; storing the product would break the exact ratio at 9-digit
    # float precision
    return {
        "horizon": payload.horizon,
        "demand_timeline": list(payload.demand_timeline),
        "thermal_efficiency": list(payload.thermal_efficiency),
        "wind_efficiency": list(payload.wind_efficiency),
        "solar_efficiency": list(payload.solar_efficiency),
        "wind_curve": _curve_to_wire(payload.wind_curve),
        "solar_curve": _curve_to_wire(payload.solar_curve),
        "tau_carbon": payload.tau_carbon,
        "tau_stability": payload.tau_stability,
        "violation_limit": payload.violation_limit,
        "battery_capacity": payload.battery_capacity,
        "capacities": list(payload.capacities),
        "unit_costs": list(payload.unit_costs),
        "ramp_scale": payload.ramp_scale,
        "violation_penalty": payload.violation_penalty,
    }


def _payload_from_wire(doc: dict) -> EnergyConfig:
    demand = tuple(int(x) for x in doc["demand_timeline"])
    return EnergyConfig(
        horizon=int(doc["horizon"]),
        demand_timeline=demand,
        budget_timeline=tuple(BUDGET_FACTOR * d for d in demand),
        thermal_efficiency=tuple(float(x) for x in doc["thermal_efficiency"]),
        wind_efficiency=tuple(float(x) for x in doc["wind_efficiency"]),
        solar_efficiency=tuple(float(x) for x in doc["solar_efficiency"]),
        wind_curve=_curve_from_wire(doc["wind_curve"]),
        solar_curve=_curve_from_wire(doc["solar_curve"]),
        tau_carbon=float(doc["tau_carbon"]),
        tau_stability=float(doc["tau_stability"]),
        violation_limit=int(doc["violation_limit"]),
        battery_capacity=float(doc["battery_capacity"]),
        capacities=tuple(float(x) for x in doc["capacities"]),
        unit_costs=tuple(float(x) for x in doc["unit_costs"]),
        ramp_scale=float(doc["ramp_scale"]),
        violation_penalty=float(doc["violation_penalty"]),
    )


_DISPATCH_KEYS = ("thermal", "wind", "solar", "battery")


def _parse_wire_action(payload: EnergyConfig, raw) -> core.AgentAction:
    if not isinstance(raw, dict):
        return core.InvalidAction(reason="expected an object with thermal/wind/solar/battery", raw=str(raw))
    lowered = {str(k).lower(): v for k, v in raw.items()}
    values = {}
    for key in _DISPATCH_KEYS:
        if key not in lowered:
            return core.InvalidAction(reason=f"missing dispatch key '{key}'", raw=str(raw))
        value = lowered[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return core.InvalidAction(reason=f"dispatch key '{key}' must be a number", raw=str(raw))
        values[key] = float(value)
    return core.DispatchCommand(**values)


core.register_env(
    core.EnvOps(
        kind="energy",
        validate_payload=_validate_payload,
        initial_surface=_initial_surface,
        transition=_transition,
        evaluate=_evaluate,
        observe=_observe,
        snapshot=_snapshot,
        payload_to_wire=_payload_to_wire,
        payload_from_wire=_payload_from_wire,
        parse_wire_action=_parse_wire_action,
    )
)
