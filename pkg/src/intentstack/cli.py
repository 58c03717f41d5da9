"""Batch entry points: solve a model, run experiments, serve, replay logs.

Exit codes: 0 success, 1 bad input, 2 budget exhausted before convergence.
Every subcommand is deterministic given its flags and seed.
"""

from __future__ import annotations

import argparse
import functools
import json
import sys
from pathlib import Path

from .episode import batch_simulate
from .eventlog import CorruptLog, replay_log
from .intent import DegenerateTask, ObservationConfig, RewardConfig, build_model, task_from_dict
from .pomdp import save_policy, uniform_belief, validate_model
from .scene import scene_from_dict
from .solver import SolverConfig, solve

_HELP_WIDTH = 78

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BUDGET = 2


class CliError(Exception):
    """Bad input documents or flags; maps to exit code 1."""


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors, which this tool reserves for budget
    # exhaustion; remap flag mistakes to the input-error code.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _load_json(path: str, what: str):
    p = Path(path)
    if not p.exists():
        raise CliError(f"{what} file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"{what} file {path} is not valid JSON: {exc}") from exc


def _dump_json(document, path: str | None) -> None:
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_solve(args) -> int:
    scene_doc = _load_json(args.scene, "scene")
    tasks_doc = _load_json(args.tasks, "tasks")
    obs_doc = _load_json(args.obs, "observation config") if args.obs else {}
    rew_doc = _load_json(args.rewards, "reward config") if args.rewards else {}
    try:
        scene = scene_from_dict(scene_doc)
        if not isinstance(tasks_doc, list) or not tasks_doc:
            raise ValueError("tasks document must be a non-empty list of tasks")
        task = task_from_dict(tasks_doc[0])
        obs = ObservationConfig(**obs_doc)
        rew = RewardConfig(**rew_doc)
        model = build_model(scene, task, obs, rew, args.discount)
    except DegenerateTask as exc:
        raise CliError(f"degenerate task: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(str(exc)) from exc
    violations = validate_model(model)
    if violations:
        raise CliError("invalid model: " + "; ".join(violations))

    config = SolverConfig(epsilon=args.epsilon, seed=args.seed)
    b0 = uniform_belief(model, over=model.states[:-1])
    policy, stats = solve(model, b0, config)
    save_policy(policy, args.out)
    report = dict(stats.to_dict(), vectors=len(policy.vectors), policy_path=args.out)
    if model.metadata.get("warnings"):
        report["warnings"] = model.metadata["warnings"]
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK if stats.converged else EXIT_BUDGET


def cmd_simulate(args) -> int:
    config = _load_json(args.config, "simulation config")
    log_path = None
    if args.out is not None:
        log_path = str(Path(args.out).with_suffix("")) + ".episode0.jsonl"
    try:
        stats = batch_simulate(
            config, episodes=args.episodes, seed=args.seed, log_first_episode_to=log_path
        )
    except (KeyError, TypeError, ValueError, DegenerateTask) as exc:
        raise CliError(str(exc)) from exc
    _dump_json(stats, args.out)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir)
    uvicorn.run(app, host="127.0.0.1", port=args.port, log_level="info")
    return EXIT_OK


def cmd_replay(args) -> int:
    if not Path(args.log).exists():
        raise CliError(f"log file not found: {args.log}")
    try:
        result = replay_log(args.log)
    except CorruptLog as exc:
        print(f"corrupt log at line {exc.line_number}: {exc.reason}", file=sys.stderr)
        return EXIT_INPUT
    if result.consistent:
        note = " (truncated log: consistent prefix)" if result.truncated else ""
        print(f"consistent: {result.events_checked} events checked{note}")
        if result.snapshot is not None:
            print(json.dumps(result.snapshot, indent=2, sort_keys=True))
        return EXIT_OK
    print(f"inconsistent at step {result.divergence_step}: {result.reason}")
    return EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    fmt = functools.partial(argparse.HelpFormatter, width=_HELP_WIDTH)
    parser = _ArgumentParser(
        prog="intentstack",
        formatter_class=fmt,
        description="Intent-disambiguation stacking: solve, simulate, serve, replay.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser(
        "solve",
        formatter_class=fmt,
        help="build the intent model for the first task and solve it",
        description="Build the intent POMDP for the first task in the tasks "
        "document, solve it to the gap target, and write the policy. "
        "Exits 2 if the budget runs out before the gap closes.",
    )
    p.add_argument("--scene", required=True, help="scene document (JSON)")
    p.add_argument("--tasks", required=True, help="task list document (JSON); the first task is solved")
    p.add_argument("--obs", default=None, help="observation config document (JSON)")
    p.add_argument("--rewards", default=None, help="reward config document (JSON)")
    p.add_argument("--discount", type=float, default=0.99, help="discount factor (default 0.99)")
    p.add_argument("--epsilon", type=float, default=0.5, help="target root bound gap (default 0.5)")
    p.add_argument("--seed", type=int, default=0, help="solver seed (default 0)")
    p.add_argument("--out", required=True, help="output path for the policy document")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser(
        "simulate",
        formatter_class=fmt,
        help="run seeded episodes against a simulated human",
        description="Run seeded episodes of the full interaction loop against "
        "the simulated human described by the config document and write the "
        "aggregate stats. The first episode's event log is written next to "
        "the stats file.",
    )
    p.add_argument("--config", required=True, help="simulation config document (JSON)")
    p.add_argument("--episodes", type=int, default=100, help="episode count (default 100)")
    p.add_argument("--seed", type=int, default=0, help="experiment seed (default 0)")
    p.add_argument("--out", default=None, help="stats output path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "serve",
        formatter_class=fmt,
        help="run the HTTP + WebSocket session service",
        description="Serve sessions over HTTP + WebSocket. The data directory "
        "stores event logs and the policy cache; the --data-dir flag "
        "overrides the INTENTSTACK_DATA_DIR environment variable.",
    )
    p.add_argument("--port", type=int, default=8000, help="listen port (default 8000)")
    p.add_argument("--data-dir", default=None, help="directory for logs and cached policies")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser(
        "replay",
        formatter_class=fmt,
        help="re-run a session log and check belief consistency",
        description="Rebuild the session from a JSONL event log, re-feed the "
        "logged inputs, and verify the recomputed beliefs match the logged "
        "ones within 1e-9. Exits 1 on divergence or a corrupt line.",
    )
    p.add_argument("--log", required=True, help="event log path (JSONL)")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
