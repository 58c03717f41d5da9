"""Interaction engine: phase automaton, simulated humans, batch experiments.

A session walks a queue of stacking tasks.  For each task it compiles and
solves the intent POMDP over the candidates still on the table, then
alternates between agent actions (gaze request, question, projection) and
human inputs (gaze point, utterance, confirmation) until the human confirms
a projection and the placement is committed.  Every event is appended to an
ordered history suitable for JSONL logging and deterministic replay.

Phases:
    ready                 the agent's turn (step_agent may be called)
    awaiting_gaze         a gaze request is outstanding
    awaiting_answer       a question about one attribute is outstanding
    awaiting_confirmation a projection awaits yes/no
    acting                transient while a confirmed placement commits
    done                  task queue exhausted
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .intent import (
    DegenerateTask,
    GAZE_ACTION,
    IntentTask,
    ObservationConfig,
    RewardConfig,
    ask_action,
    attribute_token,
    build_model,
    gaze_observation_row,
    gaze_token,
    generate_question,
    parse_utterance,
    project_action,
    project_target,
    task_from_dict,
    task_to_dict,
)
from .pomdp import (
    ImpossibleObservation,
    PolicySet,
    PomdpModel,
    belief_update,
    best_action,
    uniform_belief,
)
from .scene import (
    Scene,
    StackState,
    report_to_dict,
    scene_from_dict,
    scene_to_dict,
    stack_to_dict,
)
from .solver import SolverConfig, solve
from .stacking import (
    StabilityRefused,
    apply_placement,
    project_future_state,
    resolve_plan,
)

READY = "ready"
AWAITING_GAZE = "awaiting_gaze"
AWAITING_ANSWER = "awaiting_answer"
AWAITING_CONFIRMATION = "awaiting_confirmation"
ACTING = "acting"
DONE = "done"
PHASES = (READY, AWAITING_GAZE, AWAITING_ANSWER, AWAITING_CONFIRMATION, ACTING, DONE)

# Event kinds pushed to live clients; input and bookkeeping kinds stay log-only.
WIRE_KINDS = ("gaze_request", "question", "projection", "robot_action", "belief", "error", "done")
LOG_KINDS = WIRE_KINDS + ("session_start", "gaze_input", "utterance_input", "confirmation_input")

DEFAULT_STEP_CAP = 200


class PhaseError(RuntimeError):
    """An operation was called in a phase that does not accept it."""


class PolicyCache:
    """Solve-once cache keyed by candidate subset.

    All models compiled within one session (or one batch) share the
    observation, reward, and discount configuration, so the candidate tuple
    plus attribute tuple identifies the model.
    """

    def __init__(self, solver_config: SolverConfig | None = None):
        self.solver_config = solver_config or SolverConfig(
            epsilon=0.5, max_backups=20000, max_seconds=None, seed=0
        )
        self._policies: dict[tuple, PolicySet] = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key_for(model: PomdpModel) -> tuple:
        return (model.states[:-1], tuple(model.metadata.get("attributes", ())))

    def put(self, model: PomdpModel, policy: PolicySet) -> None:
        self._policies[self.key_for(model)] = policy

    def policy_for(self, model: PomdpModel) -> PolicySet:
        key = self.key_for(model)
        if key in self._policies:
            self.hits += 1
            return self._policies[key]
        self.misses += 1
        b0 = uniform_belief(model, over=model.states[:-1])
        policy, _stats = solve(model, b0, self.solver_config)
        self._policies[key] = policy
        return policy


class Session:
    """One human (live or simulated) working through a task queue.

    The caller supplies inputs via ingest_gaze / ingest_utterance / confirm
    and lets the agent move via step_agent (or advance, which steps whenever
    it is the agent's turn).  All mutations are strictly serial.
    """

    def __init__(
        self,
        scene: Scene,
        tasks,
        obs: ObservationConfig,
        rew: RewardConfig,
        discount: float,
        attributes: tuple[str, ...] = ("color", "size"),
        exclusion_rule: bool = True,
        policy_cache: PolicyCache | None = None,
        solver_config: SolverConfig | None = None,
        log_writer=None,
    ):
        self.scene = scene
        self.tasks = list(tasks)
        self.obs = obs
        self.rew = rew
        self.discount = float(discount)
        self.attributes = tuple(attributes)
        self.exclusion_rule = bool(exclusion_rule)
        self.cache = policy_cache or PolicyCache(solver_config)
        self._log_writer = log_writer

        self.stack = StackState(
            target_position=self._resolve_target(self.tasks[0].target if self.tasks else "stack")
        )
        self.events: list[dict] = []
        self.agent_steps = 0
        self.task_index = -1
        self.phase = READY
        self.model: PomdpModel | None = None
        self.policy: PolicySet | None = None
        self.belief: np.ndarray | None = None
        self.state_labels: tuple[str, ...] = ()
        self.candidates: tuple[str, ...] = ()
        self.rejected: set[str] = set()
        self.pending_attribute: str | None = None
        self.pending_candidate: str | None = None
        self._pending_plan = None

        self._emit("session_start", {"config": self.config_document()})
        self._start_task(0)

    def _resolve_target(self, name: str):
        if name in self.scene.targets:
            return self.scene.target_position(name)
        return (0.0, 0.0)

    def config_document(self) -> dict:
        """Everything needed to rebuild this session from scratch."""
        return {
            "scene": scene_to_dict(self.scene),
            "tasks": [task_to_dict(t) for t in self.tasks],
            "observation": asdict(self.obs),
            "rewards": asdict(self.rew),
            "discount": self.discount,
            "attributes": list(self.attributes),
            "exclusion_rule": self.exclusion_rule,
            "solver": {
                "epsilon": self.cache.solver_config.epsilon,
                "max_backups": self.cache.solver_config.max_backups,
                "seed": self.cache.solver_config.seed,
            },
        }

    # -- event plumbing ----------------------------------------------------

    def _emit(self, kind: str, payload: dict) -> dict:
        belief_after = None if self.belief is None else [float(p) for p in self.belief]
        event = {
            "step": len(self.events),
            "phase": self.phase,
            "kind": kind,
            "payload": payload,
            "belief_after": belief_after,
        }
        self.events.append(event)
        if self._log_writer is not None:
            self._log_writer(event)
        return event

    def _emit_belief(self, note: str | None = None) -> dict:
        payload = {
            "task_index": self.task_index,
            "states": list(self.state_labels),
            "belief": [float(p) for p in self.belief],
        }
        if note:
            payload["note"] = note
        return self._emit("belief", payload)

    # -- task lifecycle ----------------------------------------------------

    def _start_task(self, index: int) -> None:
        self.task_index = index
        self.rejected = set()
        self.pending_attribute = None
        self.pending_candidate = None
        self._pending_plan = None
        if index >= len(self.tasks):
            self.phase = DONE
            self.belief = None
            self.state_labels = ()
            self.candidates = ()
            self._emit("done", {"tasks_completed": len(self.tasks)})
            return
        task = self.tasks[index]
        self.stack = StackState(
            target_position=self._resolve_target(task.target), layers=self.stack.layers
        )
        remaining = tuple(c for c in task.candidates if not self.stack.contains(c))
        self.candidates = remaining
        if len(remaining) == 0:
            self.model = None
            self.policy = None
            self._emit(
                "error",
                {
                    "task_index": index,
                    "reason": "no unstacked candidates remain for this task",
                },
            )
            self._start_task(index + 1)
            return
        if len(remaining) == 1:
            # Degenerate task: nothing to disambiguate, but the confirmation
            # gate still applies, so the agent goes straight to a projection.
            self.model = None
            self.policy = None
            self.state_labels = remaining
            self.belief = np.array([1.0])
            self.phase = READY
            self._emit_belief(note="single candidate")
            return
        sub_task = IntentTask(candidates=remaining, target=task.target)
        self.model = build_model(
            self.scene, sub_task, self.obs, self.rew, self.discount, self.attributes
        )
        self.policy = self.cache.policy_for(self.model)
        self.state_labels = self.model.states
        self.belief = uniform_belief(self.model, over=remaining)
        self.phase = READY
        self._emit_belief(note="task prior")

    # -- agent turn --------------------------------------------------------

    def step_agent(self) -> dict:
        """Pick and announce the agent's next action; returns the event."""
        if self.phase != READY:
            raise PhaseError(f"step_agent called in phase {self.phase!r}")
        self.agent_steps += 1
        if self.model is None:
            candidate = self.candidates[0]
            return self._project(candidate, project_action(candidate))
        action = best_action(self.policy, self.belief, self.model.actions)
        if action == GAZE_ACTION:
            self.phase = AWAITING_GAZE
            return self._emit(
                "gaze_request",
                {
                    "task_index": self.task_index,
                    "action": action,
                    "text": generate_question(GAZE_ACTION, self.scene),
                },
            )
        if action.startswith("ask_"):
            attribute = action[len("ask_"):]
            self.phase = AWAITING_ANSWER
            self.pending_attribute = attribute
            return self._emit(
                "question",
                {
                    "task_index": self.task_index,
                    "action": action,
                    "attribute": attribute,
                    "text": generate_question(action, self.scene),
                    "reask": False,
                },
            )
        return self._project(project_target(action), action)

    def _project(self, candidate: str, action: str) -> dict:
        plan = resolve_plan(self.scene, self.stack, candidate)
        ghost, report = project_future_state(self.scene, self.stack, plan)
        self.phase = AWAITING_CONFIRMATION
        self.pending_candidate = candidate
        self._pending_plan = plan
        return self._emit(
            "projection",
            {
                "task_index": self.task_index,
                "action": action,
                "candidate": candidate,
                "ghost_scene": scene_to_dict(ghost),
                "report": report_to_dict(report),
                "text": generate_question(action, self.scene),
            },
        )

    def advance(self) -> None:
        """Let the agent act whenever it is its turn."""
        while self.phase == READY:
            self.step_agent()

    # -- human inputs ------------------------------------------------------

    def ingest_gaze(self, point) -> dict:
        """Map a gaze point to the nearest candidate's token and update belief."""
        if self.phase != AWAITING_GAZE:
            raise PhaseError(f"gaze input in phase {self.phase!r}")
        x, y = float(point[0]), float(point[1])
        nearest = min(
            self.candidates,
            key=lambda cid: (
                (self.scene.object(cid).position[0] - x) ** 2
                + (self.scene.object(cid).position[1] - y) ** 2,
                cid,
            ),
        )
        token = gaze_token(nearest)
        try:
            self.belief = belief_update(self.model, self.belief, GAZE_ACTION, token)
        except ImpossibleObservation as exc:
            self._emit(
                "error",
                {"task_index": self.task_index, "reason": str(exc), "token": token},
            )
            raise ImpossibleObservation(
                f"session step {len(self.events)}: {exc}"
            ) from exc
        self._emit(
            "gaze_input",
            {"task_index": self.task_index, "point": [x, y], "token": token},
        )
        self.phase = READY
        return self._emit_belief()

    def ingest_utterance(self, text: str) -> dict:
        """Parse an answer; unknown or out-of-model parses re-ask the question."""
        if self.phase != AWAITING_ANSWER:
            raise PhaseError(f"utterance input in phase {self.phase!r}")
        attribute = self.pending_attribute
        parsed = parse_utterance(text, attribute)
        token = None if parsed.is_unknown else parsed.observation_token()
        if token is None or token not in self.model.observations:
            self._emit(
                "utterance_input",
                {
                    "task_index": self.task_index,
                    "text": text,
                    "token": token,
                    "applied": False,
                },
            )
            question = ask_action(attribute)
            return self._emit(
                "question",
                {
                    "task_index": self.task_index,
                    "action": question,
                    "attribute": attribute,
                    "text": generate_question(question, self.scene),
                    "reask": True,
                },
            )
        try:
            self.belief = belief_update(
                self.model, self.belief, ask_action(attribute), token
            )
        except ImpossibleObservation as exc:
            self._emit(
                "error",
                {"task_index": self.task_index, "reason": str(exc), "token": token},
            )
            raise ImpossibleObservation(
                f"session step {len(self.events)}: {exc}"
            ) from exc
        self._emit(
            "utterance_input",
            {
                "task_index": self.task_index,
                "text": text,
                "token": token,
                "applied": True,
            },
        )
        self.phase = READY
        self.pending_attribute = None
        return self._emit_belief()

    def confirm(self, answer: bool) -> dict:
        """Resolve an outstanding projection: commit on yes, retry on no."""
        if self.phase != AWAITING_CONFIRMATION:
            raise PhaseError(f"confirmation in phase {self.phase!r}")
        answer = bool(answer)
        candidate = self.pending_candidate
        self._emit(
            "confirmation_input",
            {"task_index": self.task_index, "candidate": candidate, "answer": answer},
        )
        if answer:
            self.phase = ACTING
            try:
                new_scene, new_stack, report = apply_placement(
                    self.scene, self.stack, self._pending_plan
                )
            except StabilityRefused as exc:
                # Physically infeasible even though the human approved it:
                # report the refusal and fall back to the rejection path.
                self._emit(
                    "error",
                    {
                        "task_index": self.task_index,
                        "reason": str(exc),
                        "report": report_to_dict(exc.report),
                    },
                )
                return self._reject(candidate)
            self.scene = new_scene
            self.stack = new_stack
            pose = self._pending_plan.pose
            event = self._emit(
                "robot_action",
                {
                    "task_index": self.task_index,
                    "object_id": candidate,
                    "pose": [pose.x, pose.y, pose.z, pose.yaw],
                    "report": report_to_dict(report),
                    "stack": stack_to_dict(self.stack),
                },
            )
            self._start_task(self.task_index + 1)
            return event
        return self._reject(candidate)

    def _reject(self, candidate: str) -> dict:
        """Re-instantiate the belief after a rejected projection."""
        self.rejected.add(candidate)
        self.pending_candidate = None
        self._pending_plan = None
        if self.model is None:
            # Single-candidate task: nothing to exclude, start over.
            self.rejected.clear()
            self.belief = np.array([1.0])
            self.phase = READY
            return self._emit_belief(note="reinstantiated")
        remaining = [c for c in self.candidates if c not in self.rejected]
        if self.exclusion_rule and remaining:
            self.belief = uniform_belief(self.model, over=remaining)
        else:
            self.rejected.clear()
            self.belief = uniform_belief(self.model, over=self.candidates)
        self.phase = READY
        return self._emit_belief(note="reinstantiated")

    # -- snapshots ---------------------------------------------------------

    def snapshot(self) -> dict:
        return {
            "phase": self.phase,
            "task_index": self.task_index,
            "step": len(self.events),
            "agent_steps": self.agent_steps,
            "scene": scene_to_dict(self.scene),
            "stack": stack_to_dict(self.stack),
            "belief": None
            if self.belief is None
            else {
                "states": list(self.state_labels),
                "belief": [float(p) for p in self.belief],
            },
            "pending_attribute": self.pending_attribute,
            "pending_candidate": self.pending_candidate,
            "candidates": list(self.candidates),
        }


# ---------------------------------------------------------------------------
# Simulated humans and batch experiments


@dataclass(frozen=True)
class SimulatedHuman:
    """Scripted noisy human: one true intent per task.

    Gaze and answers are correct with the given accuracies; errors follow the
    same error mode as the observation model they stand in for.  The truthful
    confirm mode approves exactly the true object; always_yes approves
    anything, which exposes the raw pre-confirmation accuracy.
    """

    intents: tuple[str, ...]
    gaze_accuracy: float = 1.0
    answer_accuracy: float = 1.0
    confirm_mode: str = "truthful"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "intents", tuple(self.intents))
        if len(set(self.intents)) != len(self.intents):
            raise ValueError("intents must be distinct object ids")
        for name, acc in (("gaze_accuracy", self.gaze_accuracy), ("answer_accuracy", self.answer_accuracy)):
            if not (0.0 < acc <= 1.0):
                raise ValueError(f"{name} {acc} outside (0, 1]")
        if self.confirm_mode not in ("truthful", "always_yes"):
            raise ValueError(f"unknown confirm_mode {self.confirm_mode!r}")

    def gaze_point(self, scene: Scene, task: IntentTask, task_index: int,
                   obs: ObservationConfig, rng: np.random.Generator):
        true_id = self.intents[task_index]
        if true_id in task.candidates:
            row = gaze_observation_row(
                scene,
                task,
                true_id,
                ObservationConfig(
                    p_correct=self.gaze_accuracy,
                    gaze_mode=obs.gaze_mode,
                    gaze_length_scale=obs.gaze_length_scale,
                ),
            )
            target = task.candidates[int(rng.choice(len(row), p=row))]
        else:
            others = [c for c in task.candidates if c != true_id]
            if others and rng.random() >= self.gaze_accuracy:
                target = others[int(rng.integers(len(others)))]
            else:
                target = true_id
        return scene.object(target).position

    def answer(self, scene: Scene, task: IntentTask, task_index: int,
               attribute: str, rng: np.random.Generator) -> str:
        true_value = getattr(scene.object(self.intents[task_index]), attribute)
        values = []
        for cid in task.candidates:
            v = getattr(scene.object(cid), attribute)
            if v not in values:
                values.append(v)
        others = [v for v in values if v != true_value]
        if others and rng.random() >= self.answer_accuracy:
            return others[int(rng.integers(len(others)))]
        return true_value

    def confirm(self, candidate: str, task_index: int) -> bool:
        if self.confirm_mode == "always_yes":
            return True
        return candidate == self.intents[task_index]


@dataclass(frozen=True)
class ObjectOutcome:
    """Per-task verdict: what was intended, what got committed, retries."""

    intended_id: str
    committed_id: str | None
    correct_committed: bool
    wrong_committed: bool
    rejected_retries: int


@dataclass(frozen=True)
class EpisodeResult:
    """Aggregates of one simulated episode.

    ``questions`` counts distinct ask actions (re-asks after unparseable
    answers are not new actions); ``steps`` counts agent actions.  The
    discounted return restarts its discounting at each task, matching the
    one-POMDP-per-task construction.
    """

    outcomes: tuple[ObjectOutcome, ...]
    gaze_requests: int
    questions: int
    projections: int
    discounted_return: float
    truncated: bool
    steps: int
    first_projection_hits: int
    first_projection_total: int

    @property
    def success(self) -> bool:
        return not self.truncated and all(o.correct_committed for o in self.outcomes)


def _accrue_return(events, intents, rew: RewardConfig, discount: float) -> float:
    total = 0.0
    pow_by_task: dict[int, float] = {}
    for event in events:
        kind = event["kind"]
        if kind not in ("gaze_request", "question", "projection"):
            continue
        if kind == "question" and event["payload"].get("reask"):
            continue
        task = event["payload"]["task_index"]
        discount_pow = pow_by_task.get(task, 1.0)
        if kind == "gaze_request":
            r = rew.c_gaze
        elif kind == "question":
            r = rew.c_ask
        else:
            correct = event["payload"]["candidate"] == intents[task]
            r = rew.r_correct if correct else rew.r_incorrect
        total += discount_pow * r
        pow_by_task[task] = discount_pow * discount
    return total


def run_episode(
    model: PomdpModel | None,
    policy: PolicySet | None,
    scene: Scene,
    tasks,
    human: SimulatedHuman,
    seed=None,
    obs: ObservationConfig | None = None,
    rew: RewardConfig | None = None,
    discount: float | None = None,
    attributes: tuple[str, ...] | None = None,
    exclusion_rule: bool = True,
    step_cap: int = DEFAULT_STEP_CAP,
    policy_cache: PolicyCache | None = None,
    solver_config: SolverConfig | None = None,
    log_writer=None,
) -> EpisodeResult:
    """Drive one full episode with a simulated human.

    ``model`` and ``policy`` are the solved artifacts for the first task (as
    produced offline); later tasks are solved on demand through the policy
    cache.  Passing None for both lets the engine solve everything itself.
    Deterministic for a fixed seed (the seed argument wins over human.seed).
    """
    tasks = list(tasks)
    if len(human.intents) != len(tasks):
        raise ValueError(
            f"{len(human.intents)} intents for {len(tasks)} tasks; they must align"
        )
    for k, task in enumerate(tasks):
        if human.intents[k] not in task.candidates:
            raise ValueError(
                f"intent {human.intents[k]!r} is not a candidate of task {k}"
            )
    if model is not None:
        meta = model.metadata
        obs = obs or ObservationConfig(**meta["observation"])
        rew = rew or RewardConfig(**meta["rewards"])
        discount = model.discount if discount is None else discount
        attributes = attributes or tuple(meta["attributes"])
    else:
        obs = obs or ObservationConfig()
        rew = rew or RewardConfig()
        discount = 0.99 if discount is None else discount
        attributes = attributes or ("color", "size")

    cache = policy_cache or PolicyCache(solver_config)
    if model is not None and policy is not None:
        cache.put(model, policy)

    rng = np.random.default_rng(human.seed if seed is None else seed)
    session = Session(
        scene,
        tasks,
        obs,
        rew,
        discount,
        attributes=attributes,
        exclusion_rule=exclusion_rule,
        policy_cache=cache,
        log_writer=log_writer,
    )
    session.advance()
    iterations = 0
    while session.phase != DONE and iterations < step_cap:
        iterations += 1
        task = tasks[session.task_index]
        if session.phase == AWAITING_GAZE:
            session.ingest_gaze(
                human.gaze_point(session.scene, task, session.task_index, obs, rng)
            )
        elif session.phase == AWAITING_ANSWER:
            session.ingest_utterance(
                human.answer(session.scene, task, session.task_index,
                             session.pending_attribute, rng)
            )
        elif session.phase == AWAITING_CONFIRMATION:
            session.confirm(human.confirm(session.pending_candidate, session.task_index))
        else:
            break
        session.advance()

    events = session.events
    outcomes = []
    first_hits = 0
    first_total = 0
    for k in range(len(tasks)):
        committed = None
        retries = 0
        first_projection = None
        for event in events:
            if event["payload"].get("task_index") != k:
                continue
            if event["kind"] == "robot_action":
                committed = event["payload"]["object_id"]
            elif event["kind"] == "confirmation_input" and not event["payload"]["answer"]:
                retries += 1
            elif event["kind"] == "projection" and first_projection is None:
                first_projection = event["payload"]["candidate"]
        if first_projection is not None:
            first_total += 1
            if first_projection == human.intents[k]:
                first_hits += 1
        outcomes.append(
            ObjectOutcome(
                intended_id=human.intents[k],
                committed_id=committed,
                correct_committed=committed == human.intents[k],
                wrong_committed=committed is not None and committed != human.intents[k],
                rejected_retries=retries,
            )
        )
    return EpisodeResult(
        outcomes=tuple(outcomes),
        gaze_requests=sum(1 for e in events if e["kind"] == "gaze_request"),
        questions=sum(
            1
            for e in events
            if e["kind"] == "question" and not e["payload"].get("reask")
        ),
        projections=sum(1 for e in events if e["kind"] == "projection"),
        discounted_return=_accrue_return(events, human.intents, rew, discount),
        truncated=session.phase != DONE,
        steps=session.agent_steps,
        first_projection_hits=first_hits,
        first_projection_total=first_total,
    )


def simulation_config_document(
    scene: Scene,
    tasks,
    human: SimulatedHuman,
    obs: ObservationConfig | None = None,
    rew: RewardConfig | None = None,
    discount: float = 0.99,
    attributes: tuple[str, ...] = ("color", "size"),
    exclusion_rule: bool = True,
    epsilon: float = 0.5,
    step_cap: int = DEFAULT_STEP_CAP,
) -> dict:
    """The config document consumed by batch_simulate and the simulate command."""
    return {
        "scene": scene_to_dict(scene),
        "tasks": [task_to_dict(t) for t in tasks],
        "observation": asdict(obs or ObservationConfig()),
        "rewards": asdict(rew or RewardConfig()),
        "discount": discount,
        "attributes": list(attributes),
        "exclusion_rule": exclusion_rule,
        "human": {
            "intents": list(human.intents),
            "gaze_accuracy": human.gaze_accuracy,
            "answer_accuracy": human.answer_accuracy,
            "confirm_mode": human.confirm_mode,
        },
        "solver": {"epsilon": epsilon},
        "step_cap": step_cap,
    }


def batch_simulate(config: dict, episodes: int, seed: int, log_first_episode_to=None) -> dict:
    """Run seeded episodes from a config document and aggregate the results.

    The output document is deterministic for a fixed (config, episodes, seed):
    per-episode randomness comes from spawned substreams of the seed, and the
    solver is deterministic.  Optionally writes the first episode's event log.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    scene = scene_from_dict(config["scene"])
    tasks = [task_from_dict(t) for t in config["tasks"]]
    obs = ObservationConfig(**config.get("observation", {}))
    rew = RewardConfig(**config.get("rewards", {}))
    discount = float(config.get("discount", 0.99))
    attributes = tuple(config.get("attributes", ("color", "size")))
    exclusion_rule = bool(config.get("exclusion_rule", True))
    step_cap = int(config.get("step_cap", DEFAULT_STEP_CAP))
    solver_doc = config.get("solver", {})
    solver_config = SolverConfig(
        epsilon=float(solver_doc.get("epsilon", 0.5)),
        max_backups=int(solver_doc.get("max_backups", 20000)),
        max_seconds=None,
        seed=int(solver_doc.get("seed", 0)),
    )
    human_doc = config["human"]
    human = SimulatedHuman(
        intents=tuple(human_doc["intents"]),
        gaze_accuracy=float(human_doc.get("gaze_accuracy", 1.0)),
        answer_accuracy=float(human_doc.get("answer_accuracy", 1.0)),
        confirm_mode=human_doc.get("confirm_mode", "truthful"),
    )

    cache = PolicyCache(solver_config)
    streams = np.random.SeedSequence(seed).spawn(episodes)
    results = []
    for i in range(episodes):
        log_writer = None
        log_file = None
        if i == 0 and log_first_episode_to is not None:
            from .eventlog import EventLogWriter

            log_file = EventLogWriter(log_first_episode_to)
            log_writer = log_file.write
        try:
            results.append(
                run_episode(
                    None,
                    None,
                    scene,
                    tasks,
                    human,
                    seed=streams[i],
                    obs=obs,
                    rew=rew,
                    discount=discount,
                    attributes=attributes,
                    exclusion_rule=exclusion_rule,
                    step_cap=step_cap,
                    policy_cache=cache,
                    log_writer=log_writer,
                )
            )
        finally:
            if log_file is not None:
                log_file.close()

    n = len(results)
    successes = sum(1 for r in results if r.success)
    p = successes / n
    half_width = 1.96 * (p * (1.0 - p) / n) ** 0.5
    returns = np.array([r.discounted_return for r in results])
    wrong_total = sum(sum(1 for o in r.outcomes if o.wrong_committed) for r in results)
    first_hits = sum(r.first_projection_hits for r in results)
    first_total = sum(r.first_projection_total for r in results)
    per_task = []
    for k in range(len(tasks)):
        correct = sum(1 for r in results if r.outcomes[k].correct_committed)
        per_task.append(correct / n)
    return {
        "episodes": n,
        "seed": seed,
        "success_rate": p,
        "success_ci": [max(p - half_width, 0.0), min(p + half_width, 1.0)],
        "per_task_success": per_task,
        "wrong_commit_episodes": sum(
            1 for r in results if any(o.wrong_committed for o in r.outcomes)
        ),
        "wrong_commits_total": wrong_total,
        "first_projection_accuracy": (first_hits / first_total) if first_total else None,
        "mean_discounted_return": float(returns.mean()),
        "stderr_discounted_return": float(returns.std(ddof=1) / n**0.5) if n > 1 else 0.0,
        "mean_gaze_requests": float(np.mean([r.gaze_requests for r in results])),
        "mean_questions": float(np.mean([r.questions for r in results])),
        "mean_projections": float(np.mean([r.projections for r in results])),
        "mean_rejections": float(
            np.mean([sum(o.rejected_retries for o in r.outcomes) for r in results])
        ),
        "truncated_episodes": sum(1 for r in results if r.truncated),
        "policy_solves": cache.misses,
    }
