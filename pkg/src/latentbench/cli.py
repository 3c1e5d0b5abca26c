"""Command line entry points: generate, verify, describe, run-baseline, serve."""

from __future__ import annotations

import argparse
import sys
import time

from . import curation

BASELINE_AGENTS = (
    "random",
    "noop",
    "optimal",
    "conservative",
    "progressive",
    "correlation",
    "rolling",
    "ridge",
)


def _cmd_generate(args: argparse.Namespace) -> int:
    profile = curation.PROFILES[args.profile]
    start = time.time()
    tasks = curation.sample_suite(profile, args.master_seed)
    curation.write_suite(tasks, profile.name, args.master_seed, args.out)
    elapsed = time.time() - start
    print(f"wrote {len(tasks)} tasks to {args.out} in {elapsed:.1f}s")
    print(curation.describe_suite(tasks))
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    tasks = curation.load_suite(args.suite_dir)
    report = curation.verify_suite(tasks)
    for entry in report.entries:
        mark = "ok " if entry.solvable else "FAIL"
        print(f"[{mark}] {entry.task_id}: {entry.detail}")
    solvable = sum(1 for e in report.entries if e.solvable)
    print(f"{solvable}/{len(report.entries)} tasks solvable")
    if not report.all_solvable:
        print("offenders:", ", ".join(report.offenders))
        return 1
    return 0


def _cmd_describe(args: argparse.Namespace) -> int:
    tasks = curation.load_suite(args.suite_dir)
    print(curation.describe_suite(tasks))
    return 0


def _cmd_run_baseline(args: argparse.Namespace) -> int:
    from . import harness
    from .baselines import RandomAgent, make_trading_agent
    from .harness import ScriptedAdapter

    tasks = [t for t in curation.load_suite(args.suite_dir) if t.env_kind == args.env]
    if not tasks:
        print(f"no {args.env} tasks in {args.suite_dir}")
        return 1
    if args.env != "trading" and args.agent != "random":
        print(f"agent '{args.agent}' only plays trading; use --agent random for {args.env}")
        return 1

    def factory(task, run_index):
        if args.agent == "random":
            return ScriptedAdapter(RandomAgent(task.seed ^ run_index))
        return ScriptedAdapter(make_trading_agent(args.agent))

    results = harness.run_suite(tasks, factory, k=args.k, parallelism=args.parallelism)
    report = harness.compute_metrics(results, args.env, k=args.k)
    label = "profit" if args.env == "trading" else "success"
    print(
        f"{args.agent} on {report.n_tasks} {args.env} tasks (k={args.k}): "
        f"Avg@{args.k} {report.avg_at_k:.2f} ({label} %), Pass@{args.k} {report.pass_at_k:.2f}"
    )
    if report.mean_loop_ratio is not None:
        print(f"mean loop ratio {report.mean_loop_ratio:.3f}")
    if args.out:
        rows, summary = harness.export_results(results, args.out, args.env, k=args.k)
        print(f"wrote {rows} and {summary}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    tasks = curation.load_suite(args.suite_dir) if args.suite_dir else []
    tasks = curation.tutorial_tasks() + tasks
    app = create_app(tasks)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="latentbench")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample and persist a task suite")
    gen.add_argument("--profile", choices=sorted(curation.PROFILES), default="lite")
    gen.add_argument("--master-seed", type=int, default=2024)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_generate)

    ver = sub.add_parser("verify", help="re-run solvability oracles on a suite")
    ver.add_argument("suite_dir")
    ver.set_defaults(func=_cmd_verify)

    desc = sub.add_parser("describe", help="summarize a persisted suite")
    desc.add_argument("suite_dir")
    desc.set_defaults(func=_cmd_describe)

    base = sub.add_parser("run-baseline", help="run a scripted agent over a suite environment")
    base.add_argument("suite_dir")
    base.add_argument("--env", choices=["lights", "trading", "energy", "repo"], required=True)
    base.add_argument("--agent", choices=BASELINE_AGENTS, default="random")
    base.add_argument("--k", type=int, default=4)
    base.add_argument("--parallelism", type=int, default=1)
    base.add_argument("--out", default=None)
    base.set_defaults(func=_cmd_run_baseline)

    srv = sub.add_parser("serve", help="run the session HTTP service")
    srv.add_argument("suite_dir", nargs="?", default=None)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.set_defaults(func=_cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
