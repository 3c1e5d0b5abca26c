"""Bulb-toggling environment over a hidden boolean activation network.

Internal light ``i`` carries an activation condition over strictly lower
internal indices (light 0 is unconditionally toggleable); a hidden display
permutation maps the indices the agent sees onto the internal order. A toggle
flips the target bit only when its condition holds on the current state,
otherwise the state is untouched and the agent receives one fixed, generic
failure sentence. The goal state is all bits on.

Condition trees are nested tuples: ``("const", True)``, ``("var", j)``,
``("not", x)``, ``("and", x, y)``, ``("or", x, y)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core
from .rng import RngStream

TOGGLE_FEEDBACK = "Toggled B{index} to {value}"
FAILURE_FEEDBACK = "B{index} remains inactive. The remaining bulbs should be in a specific mode."
ON_SYMBOL = "●"
OFF_SYMBOL = "○"

BFS_MAX_LIGHTS = 20


class CapacityError(RuntimeError):
    """State space too large for exhaustive search."""


class GenerationError(RuntimeError):
    """Rejection budget exhausted while sampling a solvable network."""


Condition = tuple


@dataclass(frozen=True)
class LightTaskConfig:
    n_lights: int
    rules: tuple[Condition, ...]  # condition per internal index
    display_perm: tuple[int, ...]  # display index -> internal index
    min_solution_length: int


# ---------------------------------------------------------------------------
# Condition trees


def eval_condition(cond: Condition, bits: int) -> bool:
    op = cond[0]
    if op == "const":
        return bool(cond[1])
    if op == "var":
        return bool((bits >> cond[1]) & 1)
    if op == "not":
        return not eval_condition(cond[1], bits)
    if op == "and":
        return eval_condition(cond[1], bits) and eval_condition(cond[2], bits)
    if op == "or":
        return eval_condition(cond[1], bits) or eval_condition(cond[2], bits)
    raise core.ConfigError(f"rules: unknown condition operator '{op}'")


def _eval_condition_vec(cond: Condition, bit_columns: list[np.ndarray]) -> np.ndarray:
    op = cond[0]
    if op == "const":
        n = bit_columns[0].shape[0] if bit_columns else 1
        return np.full(n, bool(cond[1]))
    if op == "var":
        return bit_columns[cond[1]]
    if op == "not":
        return ~_eval_condition_vec(cond[1], bit_columns)
    if op == "and":
        return _eval_condition_vec(cond[1], bit_columns) & _eval_condition_vec(cond[2], bit_columns)
    if op == "or":
        return _eval_condition_vec(cond[1], bit_columns) | _eval_condition_vec(cond[2], bit_columns)
    raise core.ConfigError(f"rules: unknown condition operator '{op}'")


def condition_variables(cond: Condition) -> set[int]:
    op = cond[0]
    if op == "const":
        return set()
    if op == "var":
        return {cond[1]}
    if op == "not":
        return condition_variables(cond[1])
    return condition_variables(cond[1]) | condition_variables(cond[2])


def render_condition(cond: Condition, name_of: dict[int, str]) -> str:
    """Human-readable formula; precedence or < and < not."""

    def go(c: Condition, parent: str) -> str:
        op = c[0]
        if op == "const":
            return "True" if c[1] else "False"
        if op == "var":
            return name_of[c[1]]
        if op == "not":
            return "not " + go(c[1], "not")
        text = f"{go(c[1], op)} {op} {go(c[2], op)}"
        if op == "or" and parent in ("and", "not"):
            return f"({text})"
        if op == "and" and parent == "not":
            return f"({text})"
        return text

    return go(cond, "")


def _condition_to_wire(cond: Condition) -> list:
    op = cond[0]
    if op in ("const", "var"):
        return [op, cond[1]]
    if op == "not":
        return [op, _condition_to_wire(cond[1])]
    return [op, _condition_to_wire(cond[1]), _condition_to_wire(cond[2])]


def _condition_from_wire(doc) -> Condition:
    if not isinstance(doc, list) or not doc:
        raise ValueError(f"malformed condition node: {doc!r}")
    op = doc[0]
    if op == "const":
        return ("const", bool(doc[1]))
    if op == "var":
        return ("var", int(doc[1]))
    if op == "not":
        return ("not", _condition_from_wire(doc[1]))
    if op in ("and", "or"):
        return (op, _condition_from_wire(doc[1]), _condition_from_wire(doc[2]))
    raise ValueError(f"unknown condition operator: {op!r}")


# ---------------------------------------------------------------------------
# Transition and rendering


def apply_toggle(
    bits: int, config: LightTaskConfig, display_index: int
) -> tuple[int, str, bool]:
    """Toggle one light by display index; out-of-range consumes the step."""
    n = config.n_lights
    if not 0 <= display_index < n:
        reason = f"light index {display_index} out of range [0, {n})"
        return bits, core.FORMAT_ERROR_FEEDBACK.format(reason=reason), False
    internal = config.display_perm[display_index]
    if eval_condition(config.rules[internal], bits):
        new_bits = bits ^ (1 << internal)
        value = bool((new_bits >> internal) & 1)
        return new_bits, TOGGLE_FEEDBACK.format(index=display_index, value=value), True
    return bits, FAILURE_FEEDBACK.format(index=display_index), False


def render_observation(bits: int, config: LightTaskConfig) -> str:
    symbols = [
        ON_SYMBOL if (bits >> config.display_perm[d]) & 1 else OFF_SYMBOL
        for d in range(config.n_lights)
    ]
    return " ".join(symbols)


def bits_string(bits: int, n: int) -> str:
    """Internal-order bit string, index 0 first."""
    return "".join("1" if (bits >> i) & 1 else "0" for i in range(n))


# ---------------------------------------------------------------------------
# Exhaustive-search oracle


def _condition_tables(config: LightTaskConfig) -> list[np.ndarray]:
    n = config.n_lights
    states = np.arange(1 << n, dtype=np.int64)
    bit_columns = [((states >> j) & 1).astype(bool) for j in range(n)]
    return [_eval_condition_vec(config.rules[i], bit_columns) for i in range(n)]


def solve_bfs(config: LightTaskConfig) -> list[int] | None:
    """Shortest display-index toggle sequence from all-off to all-on.

    Returns None when the goal is unreachable. Used both as the curation
    certifier and as the desk-scale oracle in tests.
    """
    n = config.n_lights
    if n > BFS_MAX_LIGHTS:
        raise CapacityError(f"exhaustive search capped at {BFS_MAX_LIGHTS} lights, got {n}")
    size = 1 << n
    goal = size - 1
    if goal == 0:
        return []

    tables = _condition_tables(config)
    states = np.arange(size, dtype=np.int64)
    successors = []
    for d in range(n):
        internal = config.display_perm[d]
        flips = tables[internal].astype(np.int64) << internal
        successors.append(states ^ flips)

    parent_state = np.full(size, -1, dtype=np.int64)
    parent_action = np.full(size, -1, dtype=np.int64)
    visited = np.zeros(size, dtype=bool)
    visited[0] = True
    frontier = np.array([0], dtype=np.int64)

    while frontier.size:
        if visited[goal]:
            break
        next_frontier = []
        for d in range(n):
            candidates = successors[d][frontier]
            fresh = ~visited[candidates]
            if not fresh.any():
                continue
            new_states = candidates[fresh]
            sources = frontier[fresh]
            # keep the first (lowest-action, lowest-source) parent per state
            order = np.argsort(new_states, kind="stable")
            new_states = new_states[order]
            sources = sources[order]
            keep = np.ones(new_states.size, dtype=bool)
            keep[1:] = new_states[1:] != new_states[:-1]
            new_states = new_states[keep]
            sources = sources[keep]
            parent_state[new_states] = sources
            parent_action[new_states] = d
            visited[new_states] = True
            next_frontier.append(new_states)
        if not next_frontier:
            break
        frontier = np.concatenate(next_frontier)

    if not visited[goal]:
        return None
    path: list[int] = []
    state = goal
    while state != 0:
        path.append(int(parent_action[state]))
        state = int(parent_state[state])
    path.reverse()
    return path


# ---------------------------------------------------------------------------
# Generation


def _sample_condition(
    rng: RngStream, target: int, operator_mix: tuple[float, float, float], density: float
) -> Condition:
    and_weight, or_weight, not_probability = operator_mix
    n_literals = 1
    if target >= 2 and rng.random() < density:
        n_literals = 2
        if target >= 3 and rng.random() < density * 0.5:
            n_literals = 3
    pool = list(range(target))
    rng.shuffle(pool)
    picks = pool[:n_literals]

    def literal(j: int) -> Condition:
        node: Condition = ("var", j)
        if rng.random() < not_probability:
            node = ("not", node)
        return node

    cond = literal(picks[0])
    for j in picks[1:]:
        total = and_weight + or_weight
        op = "and" if rng.random() * total < and_weight else "or"
        cond = (op, cond, literal(j))
    return cond


def rules_text_for(config: LightTaskConfig) -> str:
    inverse = {internal: d for d, internal in enumerate(config.display_perm)}
    name_of = {j: f"B{inverse[j]}" for j in range(config.n_lights)}
    lines = ["Activation conditions (a bulb toggles only while its condition holds):"]
    for d in range(config.n_lights):
        internal = config.display_perm[d]
        lines.append(f"B{d}: {render_condition(config.rules[internal], name_of)}")
    return "\n".join(lines)


def generate_lights_task(
    seed: int,
    n_lights: int,
    operator_mix: tuple[float, float, float] = (1.0, 1.0, 0.35),
    density: float = 0.5,
    min_solution_length: int | None = None,
    max_attempts: int = 5000,
) -> LightTaskConfig:
    """Rejection-sample a certified-solvable network.

    Accepts only configurations whose exhaustive-search minimum solution is at
    least ``min_solution_length`` (default: one toggle per light, the floor for
    any solvable network).
    """
    if n_lights < 1:
        raise core.ConfigError(f"n_lights: must be positive, got {n_lights}")
    if n_lights > BFS_MAX_LIGHTS:
        raise CapacityError(f"generation certifies via exhaustive search; max {BFS_MAX_LIGHTS} lights")
    wanted = n_lights if min_solution_length is None else min_solution_length
    rng = RngStream(seed, "lights")
    for _ in range(max_attempts):
        rules: list[Condition] = [("const", True)]
        for target in range(1, n_lights):
            rules.append(_sample_condition(rng, target, operator_mix, density))
        perm = list(range(n_lights))
        rng.shuffle(perm)
        config = LightTaskConfig(
            n_lights=n_lights,
            rules=tuple(rules),
            display_perm=tuple(perm),
            min_solution_length=wanted,
        )
        solution = solve_bfs(config)
        if solution is not None and len(solution) >= wanted:
            return config
    raise GenerationError(
        f"no solvable network with minimum solution >= {wanted} after {max_attempts} attempts; "
        "loosen operator_mix/density or lower min_solution_length"
    )


# ---------------------------------------------------------------------------
# Engine wiring


def _validate_payload(payload) -> None:
    if not isinstance(payload, LightTaskConfig):
        raise core.ConfigError(f"payload: expected LightTaskConfig, got {type(payload).__name__}")
    n = payload.n_lights
    if n < 1:
        raise core.ConfigError(f"n_lights: must be positive, got {n}")
    if len(payload.rules) != n:
        raise core.ConfigError(f"rules: expected {n} entries, got {len(payload.rules)}")
    if sorted(payload.display_perm) != list(range(n)):
        raise core.ConfigError("display_perm: not a permutation")
    if payload.rules[0] != ("const", True):
        raise core.ConfigError("rules: internal light 0 must have the constant True condition")
    for i, cond in enumerate(payload.rules):
        above = [j for j in condition_variables(cond) if j >= i]
        if above:
            raise core.ConfigError(f"rules: condition of light {i} references index {above[0]} >= {i}")
    if payload.min_solution_length < 1:
        raise core.ConfigError("min_solution_length: must be positive")


def _initial_surface(payload: LightTaskConfig) -> int:
    return 0


def _transition(payload: LightTaskConfig, bits: int, action) -> tuple[int, str, bool, None]:
    new_bits, feedback, progressed = apply_toggle(bits, payload, action.index)
    return new_bits, feedback, progressed, None


def _evaluate(payload: LightTaskConfig, bits: int, step_index: int, budget: int) -> str:
    if bits == (1 << payload.n_lights) - 1:
        return "success"
    return "running"


def _observe(payload: LightTaskConfig, bits: int) -> str:
    return render_observation(bits, payload)


def _snapshot(payload: LightTaskConfig, bits: int):
    return bits_string(bits, payload.n_lights)


def _payload_to_wire(payload: LightTaskConfig) -> dict:
    return {
        "n_lights": payload.n_lights,
        "rules": [_condition_to_wire(cond) for cond in payload.rules],
        "display_perm": list(payload.display_perm),
        "min_solution_length": payload.min_solution_length,
    }


def _payload_from_wire(doc: dict) -> LightTaskConfig:
    return LightTaskConfig(
        n_lights=int(doc["n_lights"]),
        rules=tuple(_condition_from_wire(node) for node in doc["rules"]),
        display_perm=tuple(int(x) for x in doc["display_perm"]),
        min_solution_length=int(doc["min_solution_length"]),
    )


def _parse_wire_action(payload: LightTaskConfig, raw) -> core.AgentAction:
    if isinstance(raw, bool):
        return core.InvalidAction(reason=f"expected a light index, got {raw!r}")
    if isinstance(raw, int):
        return core.ToggleAction(index=raw)
    if isinstance(raw, str):
        text = raw.strip()
        if text.lstrip("+-").isdigit():
            return core.ToggleAction(index=int(text))
        return core.InvalidAction(reason=f"expected a light index, got {text!r}", raw=raw)
    return core.InvalidAction(reason=f"expected a light index, got {type(raw).__name__}")


core.register_env(
    core.EnvOps(
        kind="lights",
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
