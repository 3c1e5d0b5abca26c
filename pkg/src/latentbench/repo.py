"""Simulated Python-project setup over a hidden versioned dependency graph.

Packages carry two-component versions (``x.y.z`` input is normalized to
``x.y``). Directed constraint edges point from a dependent package (or the
project entry point) to a provider and are typed exact-match, major-match, or
static range. Each package edge also carries a resolution behavior that fires
when the dependent is installed: ensure (auto-install a missing provider),
force_high/force_low (coerce the provider to an extreme compatible version),
or pin (lock the provider to a recorded version). Diagnosis walks providers in
topological order and reports the first broken check, so identical states
always produce identical errors. Only running the entry script can mark the
episode successful.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import core
from .rng import RngStream

PROJECT = "__project__"

INSTALL_OK = "Successfully installed {name}=={version}"
UNINSTALL_OK = "Successfully uninstalled {name}=={version}"
NOT_INSTALLED = "ERROR: {name} is not installed."
NO_MATCH = "ERROR: No matching distribution found for {raw}"
MODULE_MISSING = "ModuleNotFoundError: No module named '{name}'."
IMPORT_ERROR_PROJECT = "ImportError: cannot import name '{symbol}' from '{name}' (during project entry)."
IMPORT_ERROR_CALLER = "ImportError: cannot import name '{symbol}' from '{name}' (while importing '{src}')."
ABI_MISMATCH = "RuntimeError: ABI mismatch detected between '{name}' and dependent packages."
OUT_OF_SYNC = "RuntimeError: tightly-coupled components are out of sync with '{name}'."
RUN_SUCCESS = "Task completed! Project ran successfully!"
SCRIPT_SUCCESS = "Script {path} ran successfully."
PYTHON_ERROR = "EnvironmentError: python>={required} is required, found {found}."
UNKNOWN_SCRIPT = "python: can't open file '{path}': No such file or directory."
UNKNOWN_COMMAND = (
    "ERROR: unsupported command '{raw}'. One command per step: "
    "repo tree | repo ls | pip install <pkg> | pip uninstall <pkg> | pip list | python <script>"
)

PYTHON_VERSIONS = ("3.8", "3.9", "3.10", "3.11", "3.12")

EDGE_KINDS = ("range", "major", "exact")  # also the per-package diagnosis order
BEHAVIORS = ("ensure", "force_high", "force_low", "pin")


class GenerationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Versions and specs


def normalize_version(text: str) -> str:
    """``x.y.z`` collapses to ``x.y``; single-component gets ``.0``."""
    parts = text.strip().split(".")
    if not parts or not all(p.isdigit() for p in parts):
        raise ValueError(f"malformed version '{text}'")
    if len(parts) == 1:
        parts.append("0")
    return f"{int(parts[0])}.{int(parts[1])}"


def version_key(version: str) -> tuple[int, int]:
    major, minor = version.split(".")
    return int(major), int(minor)


def major_of(version: str) -> int:
    return version_key(version)[0]


_COMPARATORS = ("==", ">=", "<=", ">", "<")


def parse_spec(text: str) -> list[tuple[str, str]]:
    """Comparator chain like ``>=1.1,<2.0``; empty input means any version."""
    text = text.strip()
    if not text:
        return []
    clauses = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        for op in _COMPARATORS:
            if chunk.startswith(op):
                clauses.append((op, normalize_version(chunk[len(op):])))
                break
        else:
            raise ValueError(f"malformed version constraint '{chunk}'")
    return clauses


def spec_allows(clauses: list[tuple[str, str]], version: str) -> bool:
    key = version_key(version)
    for op, bound in clauses:
        bk = version_key(bound)
        if op == "==" and key != bk:
            return False
        if op == ">=" and key < bk:
            return False
        if op == "<=" and key > bk:
            return False
        if op == ">" and key <= bk:
            return False
        if op == "<" and key >= bk:
            return False
    return True


# ---------------------------------------------------------------------------
# Configuration


@dataclass(frozen=True)
class Edge:
    src: str  # dependent package, or PROJECT for entry requirements
    dst: str  # provider
    kind: str  # range | major | exact
    lo: str | None = None
    hi: str | None = None
    behavior: str | None = None  # unset for project edges
    pin_version: str | None = None
    symbol: str = "load"  # identifier surfaced by range-violation errors


@dataclass(frozen=True)
class ScriptSpec:
    path: str
    edge_ids: tuple[int, ...]
    packages: tuple[str, ...]
    needs_python: bool


@dataclass(frozen=True)
class RepoConfig:
    packages: tuple[str, ...]
    versions: dict[str, tuple[str, ...]]
    topo_order: tuple[str, ...]
    base_libraries: tuple[str, ...]
    edges: tuple[Edge, ...]
    python_versions: tuple[str, ...]
    required_python: str
    scripts: tuple[ScriptSpec, ...]
    entry: str
    ground_truth: dict[str, str]

    def topo_position(self, name: str) -> int:
        return self.topo_order.index(name)

    def script_for(self, path: str) -> ScriptSpec | None:
        for script in self.scripts:
            if script.path == path:
                return script
        return None


@dataclass(frozen=True)
class RepoState:
    installed: dict[str, str]
    python_version: str | None
    command_count: int
    succeeded: bool = False


def initial_repo_state() -> RepoState:
    return RepoState(installed={}, python_version=None, command_count=0)


def edge_compatible(edge: Edge, src_version: str | None, dst_version: str) -> bool:
    if edge.kind == "exact":
        return src_version is not None and dst_version == src_version
    if edge.kind == "major":
        return src_version is not None and major_of(dst_version) == major_of(src_version)
    return version_key(edge.lo) <= version_key(dst_version) <= version_key(edge.hi)


def _compatible_versions(config: RepoConfig, edge: Edge, src_version: str | None) -> list[str]:
    return [v for v in config.versions[edge.dst] if edge_compatible(edge, src_version, v)]


# ---------------------------------------------------------------------------
# Installation with side effects


def resolve_install(
    state: RepoState, config: RepoConfig, package: str, spec_text: str, raw: str
) -> tuple[RepoState, str, bool]:
    if package not in config.versions:
        return state, NO_MATCH.format(raw=raw), False
    try:
        clauses = parse_spec(spec_text)
    except ValueError as exc:
        return state, f"ERROR: {exc}", False
    candidates = [v for v in config.versions[package] if spec_allows(clauses, v)]
    if not candidates:
        return state, NO_MATCH.format(raw=raw), False
    chosen = max(candidates, key=version_key)

    installed = dict(state.installed)
    changes: list[tuple[str, str | None, str]] = []

    def write(name: str, version: str) -> bool:
        old = installed.get(name)
        if old == version:
            return False
        installed[name] = version
        changes.append((name, old, version))
        return True

    write(package, chosen)

    # behavior cascade: each edge fires at most once, later packages first
    fired: set[int] = set()
    pending = [package]
    while pending:
        pending.sort(key=config.topo_position, reverse=True)
        current = pending.pop(0)
        src_version = installed.get(current)
        for edge_id, edge in enumerate(config.edges):
            if edge.src != current or edge_id in fired or edge.behavior is None:
                continue
            fired.add(edge_id)
            dst = edge.dst
            if edge.behavior == "ensure":
                if dst in installed:
                    continue
                options = _compatible_versions(config, edge, src_version)
                # nothing compatible: install the newest anyway, the mismatch
                # surfaces later at run time
                pool = options or list(config.versions[dst])
                if write(dst, max(pool, key=version_key)):
                    pending.append(dst)
            elif edge.behavior in ("force_high", "force_low"):
                options = _compatible_versions(config, edge, src_version)
                if not options:
                    continue
                pick = max(options, key=version_key) if edge.behavior == "force_high" else min(
                    options, key=version_key
                )
                if write(dst, pick):
                    pending.append(dst)
            elif edge.behavior == "pin":
                if edge.pin_version and write(dst, edge.pin_version):
                    pending.append(dst)

    # ensure closure: every ensure edge from an installed package has its provider
    settled = False
    while not settled:
        settled = True
        for edge in config.edges:
            if edge.behavior != "ensure" or edge.src not in installed:
                continue
            if edge.dst in installed:
                continue
            options = _compatible_versions(config, edge, installed.get(edge.src))
            pool = options or list(config.versions[edge.dst])
            if write(edge.dst, max(pool, key=version_key)):
                settled = False

    feedback = INSTALL_OK.format(name=package, version=chosen)
    side_effects = [c for c in changes if c[0] != package]
    if side_effects:
        side_effects.sort(key=lambda c: config.topo_position(c[0]))
        notes = []
        for name, old, new in side_effects:
            notes.append(f"{name} installed ({new})" if old is None else f"{name} {old} -> {new}")
        feedback += "\nSide effects: " + "; ".join(notes)
    new_state = replace(state, installed=installed)
    return new_state, feedback, bool(changes)


# ---------------------------------------------------------------------------
# Diagnosis


def diagnose(state: RepoState, config: RepoConfig, path: str) -> tuple[str, bool]:
    """Run a script; returns (feedback, reached_entry_success)."""
    if path == config.entry:
        script = ScriptSpec(
            path=config.entry,
            edge_ids=tuple(range(len(config.edges))),
            packages=config.packages,
            needs_python=True,
        )
    else:
        found = config.script_for(path)
        if found is None:
            return UNKNOWN_SCRIPT.format(path=path), False
        script = found

    if script.needs_python:
        current = state.python_version
        if current is None or version_key(current) < version_key(config.required_python):
            return (
                PYTHON_ERROR.format(required=config.required_python, found=current or "none"),
                False,
            )

    wanted = set(script.edge_ids)
    in_script = set(script.packages)
    for provider in config.topo_order:
        if provider not in in_script:
            continue
        if provider not in state.installed:
            return MODULE_MISSING.format(name=provider), False
        version = state.installed[provider]
        for kind in EDGE_KINDS:
            for edge_id, edge in enumerate(config.edges):
                if edge_id not in wanted or edge.dst != provider or edge.kind != kind:
                    continue
                if edge.src == PROJECT:
                    src_version = None
                    if kind != "range":
                        continue  # project edges are always ranges
                else:
                    src_version = state.installed.get(edge.src)
                    if src_version is None:
                        continue  # dormant until the dependent is installed
                if edge_compatible(edge, src_version, version):
                    continue
                if kind == "range":
                    if edge.src == PROJECT:
                        return IMPORT_ERROR_PROJECT.format(symbol=edge.symbol, name=provider), False
                    return (
                        IMPORT_ERROR_CALLER.format(symbol=edge.symbol, name=provider, src=edge.src),
                        False,
                    )
                if kind == "major":
                    return ABI_MISMATCH.format(name=provider), False
                return OUT_OF_SYNC.format(name=provider), False

    if path == config.entry:
        return RUN_SUCCESS, True
    return SCRIPT_SUCCESS.format(path=path), False


# ---------------------------------------------------------------------------
# Command interpreter


def render_tree(config: RepoConfig) -> str:
    by_dir: dict[str, list[str]] = {}
    roots = [config.entry]
    for script in config.scripts:
        if "/" in script.path:
            directory, filename = script.path.split("/", 1)
            by_dir.setdefault(directory, []).append(filename)
        else:
            roots.append(script.path)
    lines = ["."]
    for name in sorted(roots):
        lines.append(f"|-- {name}")
    for directory in sorted(by_dir):
        lines.append(f"|-- {directory}/")
        for filename in sorted(by_dir[directory]):
            lines.append(f"|   |-- {filename}")
    return "\n".join(lines)


def render_pip_list(state: RepoState) -> str:
    lines = []
    if state.python_version:
        lines.append(f"python=={state.python_version}")
    for name in sorted(state.installed):
        lines.append(f"{name}=={state.installed[name]}")
    return "\n".join(lines) if lines else "(nothing installed)"


def _split_install_arg(arg: str) -> tuple[str, str]:
    for i, ch in enumerate(arg):
        if ch in "=<>!":
            return arg[:i].strip(), arg[i:].strip()
    return arg.strip(), ""


def execute_command(
    state: RepoState, config: RepoConfig, action: core.ShellCommand
) -> tuple[RepoState, str, bool]:
    raw = action.command.strip()
    text = " ".join(raw.split())
    state = replace(state, command_count=state.command_count + 1)

    if text in ("repo tree", "repo ls"):
        return state, render_tree(config), False
    if text == "pip list":
        return state, render_pip_list(state), False

    if text.startswith("pip install "):
        arg = text[len("pip install "):].strip()
        if not arg:
            return state, UNKNOWN_COMMAND.format(raw=raw), False
        name, spec_text = _split_install_arg(arg)
        if name == "python":
            try:
                clauses = parse_spec(spec_text)
            except ValueError as exc:
                return state, f"ERROR: {exc}", False
            options = [v for v in config.python_versions if spec_allows(clauses, v)]
            if not options:
                return state, NO_MATCH.format(raw=arg), False
            chosen = max(options, key=version_key)
            progressed = state.python_version != chosen
            state = replace(state, python_version=chosen)
            return state, INSTALL_OK.format(name="python", version=chosen), progressed
        new_state, feedback, progressed = resolve_install(state, config, name, spec_text, arg)
        return new_state, feedback, progressed

    if text.startswith("pip uninstall "):
        name = text[len("pip uninstall "):].strip()
        if name == "python" and state.python_version is not None:
            version = state.python_version
            state = replace(state, python_version=None)
            return state, UNINSTALL_OK.format(name="python", version=version), True
        if name in state.installed:
            installed = dict(state.installed)
            version = installed.pop(name)
            state = replace(state, installed=installed)
            return state, UNINSTALL_OK.format(name=name, version=version), True
        return state, NOT_INSTALLED.format(name=name), False

    if text.startswith("python "):
        path = text[len("python "):].strip()
        feedback, succeeded = diagnose(state, config, path)
        if succeeded:
            state = replace(state, succeeded=True)
        return state, feedback, False

    return state, UNKNOWN_COMMAND.format(raw=raw), False


# ---------------------------------------------------------------------------
# Generation


_DIR_NAMES = ("core", "utils", "models", "services", "data")
_FILE_NAMES = ("smoke.py", "check.py", "pipeline.py", "io_test.py", "train.py", "verify.py")
_SYMBOLS = ("load_config", "init_engine", "register_hooks", "open_session", "build_index", "attach_backend")


def _sample_versions(rng: RngStream) -> list[str]:
    count = rng.randint(3, 5)
    pool = [f"{major}.{minor}" for major in range(0, 3) for minor in range(0, 4)]
    rng.shuffle(pool)
    return sorted(pool[:count], key=version_key)


def _ensure_version(versions: list[str], version: str) -> list[str]:
    if version not in versions:
        versions.append(version)
        versions.sort(key=version_key)
    return versions


def generate_repo_task(
    seed: int,
    n_packages: int,
    constraint_mix: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> RepoConfig:
    """Solution-first sampling: pick a ground truth, then emit constraints
    and behaviors guaranteed to admit it."""
    if n_packages < 2:
        raise core.ConfigError(f"n_packages: need at least 2, got {n_packages}")
    rng = RngStream(seed, "repo")
    exact_w, major_w, range_w = constraint_mix

    names = [f"pkg{i}" for i in range(n_packages)]
    topo = list(names)
    rng.shuffle(topo)
    n_base = 1 if n_packages < 4 or rng.random() < 0.5 else 2
    bases = tuple(topo[:n_base])

    versions = {name: _sample_versions(rng.substream(f"versions/{name}")) for name in names}
    ground_truth = {name: rng.choice(versions[name]) for name in names}
    required_python = rng.choice(("3.9", "3.10", "3.11"))

    edges: list[Edge] = []

    def behavior_for(rng_: RngStream, dst: str) -> tuple[str, str | None]:
        roll = rng_.random()
        if roll < 0.4:
            return "ensure", None
        if roll < 0.6:
            return "force_high", None
        if roll < 0.8:
            return "force_low", None
        return "pin", ground_truth[dst]

    # base-library coupling: exact or major version match
    for name in topo[n_base:]:
        if rng.random() > 0.75:
            continue
        base = bases[rng.randint(0, len(bases) - 1)]
        kind = "exact" if rng.random() * (exact_w + major_w) < exact_w else "major"
        if kind == "exact":
            _ensure_version(versions[name], ground_truth[base])
            ground_truth[name] = ground_truth[base]
        else:
            base_major = major_of(ground_truth[base])
            same_major = [v for v in versions[name] if major_of(v) == base_major]
            if not same_major:
                candidate = f"{base_major}.{rng.randint(0, 3)}"
                _ensure_version(versions[name], candidate)
                same_major = [candidate]
            ground_truth[name] = rng.choice(same_major)
        behavior, pin = behavior_for(rng, base)
        edges.append(Edge(src=name, dst=base, kind=kind, behavior=behavior, pin_version=pin))

    # range edges between non-base packages, respecting the topological order
    for i, name in enumerate(topo):
        if i <= n_base:
            continue
        if range_w <= 0 or rng.random() > 0.45:
            continue
        provider = topo[rng.randint(n_base, i - 1)] if i > n_base else None
        if provider is None or provider == name:
            continue
        gt = ground_truth[provider]
        lows = [v for v in versions[provider] if version_key(v) <= version_key(gt)]
        highs = [v for v in versions[provider] if version_key(v) >= version_key(gt)]
        lo = rng.choice(lows)
        hi = rng.choice(highs)
        behavior, pin = behavior_for(rng, provider)
        edges.append(
            Edge(
                src=name,
                dst=provider,
                kind="range",
                lo=lo,
                hi=hi,
                behavior=behavior,
                pin_version=pin,
                symbol=rng.choice(_SYMBOLS),
            )
        )

    # project requirements cover every package
    for name in topo:
        gt = ground_truth[name]
        if rng.random() < 0.4:
            lo = hi = gt
        else:
            lows = [v for v in versions[name] if version_key(v) <= version_key(gt)]
            highs = [v for v in versions[name] if version_key(v) >= version_key(gt)]
            lo = rng.choice(lows)
            hi = rng.choice(highs)
        edges.append(Edge(src=PROJECT, dst=name, kind="range", lo=lo, hi=hi, symbol=rng.choice(_SYMBOLS)))

    # two-level script tree; each sub-script exercises a slice of the graph
    package_edge_ids = [i for i, e in enumerate(edges) if e.src != PROJECT]
    project_edge_ids = [i for i, e in enumerate(edges) if e.src == PROJECT]
    n_scripts = rng.randint(2, min(4, max(2, n_packages)))
    dirs = list(_DIR_NAMES)
    rng.shuffle(dirs)
    files = list(_FILE_NAMES)
    rng.shuffle(files)
    scripts: list[ScriptSpec] = []
    all_ids = package_edge_ids + project_edge_ids
    for s in range(n_scripts):
        slice_ids = sorted(all_ids[s::n_scripts])
        if not slice_ids:
            continue
        pkgs = set()
        for edge_id in slice_ids:
            edge = edges[edge_id]
            pkgs.add(edge.dst)
            if edge.src != PROJECT:
                pkgs.add(edge.src)
        scripts.append(
            ScriptSpec(
                path=f"{dirs[s % len(dirs)]}/{files[s % len(files)]}",
                edge_ids=tuple(slice_ids),
                packages=tuple(sorted(pkgs)),
                needs_python=s == 0,
            )
        )

    config = RepoConfig(
        packages=tuple(names),
        versions={name: tuple(vs) for name, vs in versions.items()},
        topo_order=tuple(topo),
        base_libraries=bases,
        edges=tuple(edges),
        python_versions=PYTHON_VERSIONS,
        required_python=required_python,
        scripts=tuple(scripts),
        entry="run.py",
        ground_truth=dict(ground_truth),
    )
    for edge in config.edges:
        src_version = None if edge.src == PROJECT else ground_truth[edge.src]
        if not edge_compatible(edge, src_version, ground_truth[edge.dst]):
            raise GenerationError(f"ground truth violates edge {edge}")
    return config


def ground_truth_command_script(config: RepoConfig) -> list[str]:
    """Install sequence that provably reaches the ground truth, then the entry."""
    commands = [f"pip install python=={config.required_python}"]
    for name in reversed(config.topo_order):
        commands.append(f"pip install {name}=={config.ground_truth[name]}")
    commands.append(f"python {config.entry}")
    return commands


def count_satisfying_assignments(config: RepoConfig, limit: int = 2) -> int:
    """Backtracking search over the full version product space (desk-scale)."""
    topo = config.topo_order
    found = 0

    def backtrack(position: int, assignment: dict[str, str]) -> None:
        nonlocal found
        if found >= limit:
            return
        if position == len(topo):
            found += 1
            return
        name = topo[position]
        for version in config.versions[name]:
            ok = True
            for edge in config.edges:
                if edge.src == PROJECT and edge.dst == name:
                    if not edge_compatible(edge, None, version):
                        ok = False
                        break
                elif edge.src == name and edge.dst in assignment:
                    if not edge_compatible(edge, version, assignment[edge.dst]):
                        ok = False
                        break
            if ok:
                assignment[name] = version
                backtrack(position + 1, assignment)
                del assignment[name]

    backtrack(0, {})
    return found


def rules_text_for(config: RepoConfig) -> str:
    lines = ["Hidden project requirements:", f"- python>={config.required_python}"]
    for edge in config.edges:
        if edge.src == PROJECT:
            if edge.lo == edge.hi:
                lines.append(f"- {edge.dst}=={edge.lo}")
            else:
                lines.append(f"- {edge.dst}>={edge.lo},<={edge.hi}")
    for edge in config.edges:
        if edge.src == PROJECT:
            continue
        if edge.kind == "exact":
            lines.append(f"- {edge.src} version must exactly match {edge.dst}")
        elif edge.kind == "major":
            lines.append(f"- {edge.src} major version must match {edge.dst}")
        else:
            lines.append(f"- {edge.src} requires {edge.dst}>={edge.lo},<={edge.hi}")
        if edge.behavior == "ensure":
            lines.append(f"  (installing {edge.src} auto-installs {edge.dst} when missing)")
        elif edge.behavior in ("force_high", "force_low"):
            extreme = "highest" if edge.behavior == "force_high" else "lowest"
            lines.append(f"  (installing {edge.src} forces {edge.dst} to the {extreme} compatible version)")
        elif edge.behavior == "pin":
            lines.append(f"  (installing {edge.src} pins {edge.dst} to {edge.pin_version})")
    return "\n".join(lines)


def build_tutorial_config() -> RepoConfig:
    """Three-package walkthrough configuration used in docs and tests."""
    versions = {
        "pkg1": ("0.1", "1.0", "2.0"),
        "pkg2": ("1.0", "1.2", "2.0"),
        "pkg3": ("0.1", "1.0"),
    }
    edges = (
        Edge(src=PROJECT, dst="pkg1", kind="range", lo="1.0", hi="1.0", symbol="load_config"),
        Edge(src=PROJECT, dst="pkg2", kind="range", lo="1.2", hi="2.0", symbol="init_engine"),
        Edge(src=PROJECT, dst="pkg3", kind="range", lo="0.1", hi="1.0", symbol="open_session"),
        Edge(src="pkg2", dst="pkg1", kind="major", behavior="ensure"),
        Edge(src="pkg3", dst="pkg1", kind="exact", behavior="ensure"),
    )
    scripts = (
        ScriptSpec(path="core/smoke.py", edge_ids=(0, 3), packages=("pkg1", "pkg2"), needs_python=True),
    )
    return RepoConfig(
        packages=("pkg1", "pkg2", "pkg3"),
        versions=versions,
        topo_order=("pkg1", "pkg2", "pkg3"),
        base_libraries=("pkg1",),
        edges=edges,
        python_versions=PYTHON_VERSIONS,
        required_python="3.10",
        scripts=scripts,
        entry="run.py",
        ground_truth={"pkg1": "1.0", "pkg2": "1.2", "pkg3": "1.0"},
    )


# ---------------------------------------------------------------------------
# Engine wiring


def _validate_payload(payload) -> None:
    if not isinstance(payload, RepoConfig):
        raise core.ConfigError(f"payload: expected RepoConfig, got {type(payload).__name__}")
    if sorted(payload.topo_order) != sorted(payload.packages):
        raise core.ConfigError("topo_order: must be a permutation of packages")
    position = {name: i for i, name in enumerate(payload.topo_order)}
    for edge in payload.edges:
        if edge.dst not in position:
            raise core.ConfigError(f"edges: unknown provider '{edge.dst}'")
        if edge.src != PROJECT:
            if edge.src not in position:
                raise core.ConfigError(f"edges: unknown dependent '{edge.src}'")
            if position[edge.src] <= position[edge.dst]:
                raise core.ConfigError(
                    f"edges: {edge.src} -> {edge.dst} does not point backward in the topological order"
                )
        if edge.kind == "range" and (edge.lo is None or edge.hi is None):
            raise core.ConfigError("edges: range edges need lo and hi bounds")
    for name, version in payload.ground_truth.items():
        if version not in payload.versions.get(name, ()):
            raise core.ConfigError(f"ground_truth: {name}=={version} is not an available version")
    for edge in payload.edges:
        src_version = None if edge.src == PROJECT else payload.ground_truth[edge.src]
        if not edge_compatible(edge, src_version, payload.ground_truth[edge.dst]):
            raise core.ConfigError(f"ground_truth: violates edge {edge.src} -> {edge.dst}")


def _initial_surface(payload: RepoConfig) -> RepoState:
    return initial_repo_state()


def _transition(payload: RepoConfig, state: RepoState, action) -> tuple[RepoState, str, bool, None]:
    new_state, feedback, progressed = execute_command(state, payload, action)
    return new_state, feedback, progressed, None


def _evaluate(payload: RepoConfig, state: RepoState, step_index: int, budget: int) -> str:
    return "success" if state.succeeded else "running"


def _observe(payload: RepoConfig, state: RepoState) -> str:
    installed = render_pip_list(state)
    return f"Installed packages:\n{installed}"


def _snapshot(payload: RepoConfig, state: RepoState):
    return {
        "installed": dict(sorted(state.installed.items())),
        "python": state.python_version,
        "succeeded": state.succeeded,
    }


def _edge_to_wire(edge: Edge) -> dict:
    return {
        "src": edge.src,
        "dst": edge.dst,
        "kind": edge.kind,
        "lo": edge.lo,
        "hi": edge.hi,
        "behavior": edge.behavior,
        "pin_version": edge.pin_version,
        "symbol": edge.symbol,
    }


def _payload_to_wire(payload: RepoConfig) -> dict:
    return {
        "packages": list(payload.packages),
        "versions": {name: list(vs) for name, vs in payload.versions.items()},
        "topo_order": list(payload.topo_order),
        "base_libraries": list(payload.base_libraries),
        "edges": [_edge_to_wire(edge) for edge in payload.edges],
        "python_versions": list(payload.python_versions),
        "required_python": payload.required_python,
        "scripts": [
            {
                "path": s.path,
                "edge_ids": list(s.edge_ids),
                "packages": list(s.packages),
                "needs_python": s.needs_python,
            }
            for s in payload.scripts
        ],
        "entry": payload.entry,
        "ground_truth": dict(payload.ground_truth),
    }


def _payload_from_wire(doc: dict) -> RepoConfig:
    return RepoConfig(
        packages=tuple(doc["packages"]),
        versions={name: tuple(vs) for name, vs in doc["versions"].items()},
        topo_order=tuple(doc["topo_order"]),
        base_libraries=tuple(doc["base_libraries"]),
        edges=tuple(
            Edge(
                src=e["src"],
                dst=e["dst"],
                kind=e["kind"],
                lo=e.get("lo"),
                hi=e.get("hi"),
                behavior=e.get("behavior"),
                pin_version=e.get("pin_version"),
                symbol=e.get("symbol", "load"),
            )
            for e in doc["edges"]
        ),
        python_versions=tuple(doc["python_versions"]),
        required_python=doc["required_python"],
        scripts=tuple(
            ScriptSpec(
                path=s["path"],
                edge_ids=tuple(int(i) for i in s["edge_ids"]),
                packages=tuple(s["packages"]),
                needs_python=bool(s["needs_python"]),
            )
            for s in doc["scripts"]
        ),
        entry=doc["entry"],
        ground_truth=dict(doc["ground_truth"]),
    )


def _parse_wire_action(payload: RepoConfig, raw) -> core.AgentAction:
    if isinstance(raw, str) and raw.strip():
        return core.ShellCommand(command=raw.strip())
    return core.InvalidAction(reason="expected a single shell command string", raw=str(raw))


core.register_env(
    core.EnvOps(
        kind="repo",
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
