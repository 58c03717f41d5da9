"""Append-only JSONL event logs and deterministic replay.

One event per line with the keys {step, phase, kind, payload, belief_after}.
The first event of a well-formed log is session_start, whose payload embeds
the whole session config, so a log is self-contained: replay rebuilds a
fresh session from that config, feeds it the logged inputs, and compares the
recomputed beliefs with the logged ones.  A malformed line in the middle of
a log is corruption; a malformed final line is truncation, and the intact
prefix is still replayable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

EVENT_KEYS = ("step", "phase", "kind", "payload", "belief_after")

BELIEF_TOL = 1e-9

_INPUT_KINDS = ("gaze_input", "utterance_input", "confirmation_input")


class CorruptLog(ValueError):
    """A log line that is not valid JSON or not a valid event document."""

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}")


class EventLogWriter:
    """Writes events as JSONL, one flushed line per event."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", encoding="utf-8")

    def write(self, event: dict) -> None:
        self._fh.write(json.dumps(event, sort_keys=True) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_log(path, events) -> None:
    with EventLogWriter(path) as writer:
        for event in events:
            writer.write(event)


def _parse_event(line: str, line_number: int) -> dict:
    try:
        event = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptLog(line_number, f"invalid JSON ({exc.msg})") from exc
    if not isinstance(event, dict):
        raise CorruptLog(line_number, "event is not an object")
    missing = [k for k in EVENT_KEYS if k not in event]
    if missing:
        raise CorruptLog(line_number, f"missing keys {missing}")
    return event


def read_log(path) -> tuple[list[dict], bool]:
    """Parse a JSONL log; returns (events, truncated).

    A final line that fails to parse marks the log as truncated (the process
    writing it presumably died mid-line); a failing line with valid lines
    after it raises CorruptLog.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    events: list[dict] = []
    truncated = False
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            events.append(_parse_event(line, i + 1))
        except CorruptLog:
            if i == len(lines) - 1:
                truncated = True
                break
            raise
    return events, truncated


@dataclass(frozen=True)
class ReplayResult:
    """Verdict of replaying a log against a fresh engine.

    ``consistent`` means every replayed event matched the logged one in kind
    and belief (within BELIEF_TOL).  On divergence, ``divergence_step`` names
    the first mismatching step and ``reason`` says what differed.
    """

    consistent: bool
    events_checked: int
    truncated: bool
    divergence_step: int | None = None
    reason: str | None = None
    snapshot: dict | None = None


def _beliefs_match(a, b) -> bool:
    if a is None or b is None:
        return a == b
    if len(a) != len(b):
        return False
    return all(math.isfinite(y) and abs(x - y) <= BELIEF_TOL for x, y in zip(a, b))


def replay_log(path) -> ReplayResult:
    """Rebuild the session from a log and verify the belief trajectory."""
    from .episode import PhaseError, Session
    from .intent import ObservationConfig, RewardConfig, task_from_dict
    from .pomdp import ImpossibleObservation
    from .scene import scene_from_dict
    from .solver import SolverConfig

    events, truncated = read_log(path)
    if not events:
        return ReplayResult(
            consistent=False,
            events_checked=0,
            truncated=truncated,
            divergence_step=None,
            reason="log is empty",
        )
    first = events[0]
    if first["kind"] != "session_start":
        return ReplayResult(
            consistent=False,
            events_checked=0,
            truncated=truncated,
            divergence_step=first.get("step", 0),
            reason="log does not begin with session_start",
        )
    config = first["payload"]["config"]
    solver_doc = config.get("solver", {})
    session = Session(
        scene=scene_from_dict(config["scene"]),
        tasks=[task_from_dict(t) for t in config["tasks"]],
        obs=ObservationConfig(**config["observation"]),
        rew=RewardConfig(**config["rewards"]),
        discount=config["discount"],
        attributes=tuple(config.get("attributes", ("color", "size"))),
        exclusion_rule=config.get("exclusion_rule", True),
        solver_config=SolverConfig(
            epsilon=float(solver_doc.get("epsilon", 0.5)),
            max_backups=solver_doc.get("max_backups", 20000),
            max_seconds=None,
            seed=int(solver_doc.get("seed", 0)),
        ),
    )
    session.advance()
    # Feed every logged input in order; the engine regenerates the rest.
    for event in events:
        if event["kind"] not in _INPUT_KINDS:
            continue
        payload = event["payload"]
        try:
            if event["kind"] == "gaze_input":
                session.ingest_gaze(payload["point"])
            elif event["kind"] == "utterance_input":
                session.ingest_utterance(payload["text"])
            else:
                session.confirm(payload["answer"])
        except ImpossibleObservation:
            # The engine already emitted the matching error event; the
            # original session hit the same wall, so streams stay aligned.
            pass
        except PhaseError as exc:
            return ReplayResult(
                consistent=False,
                events_checked=event["step"],
                truncated=truncated,
                divergence_step=event["step"],
                reason=f"input rejected on replay: {exc}",
            )
        session.advance()

    replayed = session.events
    if len(replayed) < len(events):
        return ReplayResult(
            consistent=False,
            events_checked=len(replayed),
            truncated=truncated,
            divergence_step=len(replayed),
            reason=f"replay produced {len(replayed)} events for {len(events)} logged",
        )
    for logged, fresh in zip(events, replayed):
        step = logged["step"]
        if fresh["step"] != step:
            return ReplayResult(
                consistent=False,
                events_checked=step,
                truncated=truncated,
                divergence_step=step,
                reason=f"step index {fresh['step']} where log says {step}",
            )
        if fresh["kind"] != logged["kind"]:
            return ReplayResult(
                consistent=False,
                events_checked=step,
                truncated=truncated,
                divergence_step=step,
                reason=f"kind {fresh['kind']!r} where log says {logged['kind']!r}",
            )
        if not _beliefs_match(fresh["belief_after"], logged["belief_after"]):
            return ReplayResult(
                consistent=False,
                events_checked=step,
                truncated=truncated,
                divergence_step=step,
                reason="belief diverges from the logged trajectory",
            )
    return ReplayResult(
        consistent=True,
        events_checked=len(events),
        truncated=truncated,
        snapshot=session.snapshot(),
    )
