"""Compile a tabletop scene and task into an intent-disambiguation POMDP.

States are the candidate objects plus one absorbing terminal state.  The
agent can request gaze, ask about an attribute, or project (preview) a
candidate placement; projecting commits the decision and moves every state to
terminal.  Observations are per-candidate gaze tokens, attribute-value tokens
for values present among the candidates, and a null token emitted by the
terminal state and by projections.

This module also owns the small utterance grammar and the question
templates; speech recognition and synthesis are out of scope.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from math import exp

import numpy as np

from .pomdp import PomdpModel
from .scene import Scene

COLOR_WORDS = ("red", "green", "blue", "yellow")

SIZE_SYNONYMS = {
    "small": "small",
    "little": "small",
    "tiny": "small",
    "large": "large",
    "big": "large",
    "huge": "large",
}

CONFIRM_WORDS = {
    "yes": True,
    "yeah": True,
    "correct": True,
    "confirm": True,
    "no": False,
    "nope": False,
    "wrong": False,
    "cancel": False,
}

FILLER_WORDS = frozenset({"the", "a", "one", "block", "please"})

NULL_TOKEN = "null"
TERMINAL_STATE = "terminal"
GAZE_ACTION = "gaze"
DEFAULT_ATTRIBUTES = ("color", "size")


def gaze_token(object_id: str) -> str:
    return f"gaze_{object_id}"


def attribute_token(attribute: str, value: str) -> str:
    return f"{attribute}_{value}"


def ask_action(attribute: str) -> str:
    return f"ask_{attribute}"


def project_action(object_id: str) -> str:
    return f"project_{object_id}"


def project_target(action: str) -> str:
    """Candidate id referenced by a project action label."""
    if not action.startswith("project_"):
        raise ValueError(f"{action!r} is not a project action")
    return action[len("project_"):]


class DegenerateTask(ValueError):
    """The task has fewer than two candidates, so no planning is needed."""


@dataclass(frozen=True)
class ObservationConfig:
    """Noise model for gaze and dialogue observations."""

    p_correct: float = 0.8
    gaze_mode: str = "uniform_error"
    gaze_length_scale: float | None = None

    def __post_init__(self):
        if not (0.0 < self.p_correct <= 1.0):
            raise ValueError(f"p_correct {self.p_correct} outside (0, 1]")
        if self.gaze_mode not in ("uniform_error", "proximity_weighted"):
            raise ValueError(f"unknown gaze_mode {self.gaze_mode!r}")
        if self.gaze_mode == "proximity_weighted":
            if self.gaze_length_scale is None or not self.gaze_length_scale > 0:
                raise ValueError("proximity_weighted mode needs gaze_length_scale > 0")


@dataclass(frozen=True)
class RewardConfig:
    """Reward signs and ordering follow the interaction cost model:
    projecting the right object pays well, the wrong one badly, and a gaze
    request is cheaper than a spoken question."""

    r_correct: float = 100.0
    r_incorrect: float = -100.0
    c_gaze: float = -1.0
    c_ask: float = -2.0

    def __post_init__(self):
        if not self.r_correct > 0:
            raise ValueError("r_correct must be positive")
        if not self.r_incorrect < 0:
            raise ValueError("r_incorrect must be negative")
        if not (self.c_gaze < 0 and self.c_ask < 0):
            raise ValueError("action costs must be negative")
        if not abs(self.c_gaze) < abs(self.c_ask):
            raise ValueError("|c_gaze| must be smaller than |c_ask|")


@dataclass(frozen=True)
class IntentTask:
    """One stacking step: the candidate ids the human may intend, in order,
    and the named target the chosen object goes to."""

    candidates: tuple[str, ...]
    target: str = "stack"

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not self.candidates:
            raise ValueError("task needs at least one candidate")
        if len(set(self.candidates)) != len(self.candidates):
            raise ValueError("task candidates contain duplicates")


def task_to_dict(task: IntentTask) -> dict:
    return {"candidates": list(task.candidates), "target": task.target}


def task_from_dict(doc: dict) -> IntentTask:
    return IntentTask(candidates=tuple(doc["candidates"]), target=doc.get("target", "stack"))


def gaze_observation_row(
    scene: Scene, task: IntentTask, true_id: str, obs: ObservationConfig
) -> np.ndarray:
    """Distribution over gaze tokens (candidate order) given the true intent.

    Mass p_correct lands on the true candidate; the remainder is uniform over
    the others, or decayed by exp(-distance / length scale) in
    proximity-weighted mode.  A single-candidate task gets the full mass.
    """
    if true_id not in task.candidates:
        raise ValueError(f"{true_id!r} is not a candidate of the task")
    k = len(task.candidates)
    row = np.zeros(k)
    ti = task.candidates.index(true_id)
    if k == 1:
        row[ti] = 1.0
        return row
    row[ti] = obs.p_correct
    remainder = 1.0 - obs.p_correct
    others = [i for i in range(k) if i != ti]
    if obs.gaze_mode == "uniform_error" or remainder == 0.0:
        for i in others:
            row[i] = remainder / len(others)
    else:
        tx, ty = scene.object(true_id).position
        weights = []
        for i in others:
            ox, oy = scene.object(task.candidates[i]).position
            d = ((ox - tx) ** 2 + (oy - ty) ** 2) ** 0.5
            weights.append(exp(-d / obs.gaze_length_scale))
        total = sum(weights)
        for i, w in zip(others, weights):
            row[i] = remainder * w / total
    return row


def _ask_row(values: list[str], tokens: list[str], true_value: str, p_correct: float) -> np.ndarray:
    """Distribution over one attribute channel's tokens given the true value."""
    row = np.zeros(len(tokens))
    ti = values.index(true_value)
    if len(tokens) == 1:
        row[ti] = 1.0
        return row
    row[ti] = p_correct
    for i in range(len(tokens)):
        if i != ti:
            row[i] = (1.0 - p_correct) / (len(tokens) - 1)
    return row


def build_model(
    scene: Scene,
    task: IntentTask,
    obs: ObservationConfig,
    rew: RewardConfig,
    discount: float,
    attributes: tuple[str, ...] = DEFAULT_ATTRIBUTES,
) -> PomdpModel:
    """Assemble the intent POMDP for one task.

    Gaze and ask actions leave the state unchanged; every project action
    jumps to the absorbing terminal state, which emits only the null token
    and pays nothing.  Ask channels whose candidates all share a value are
    kept but flagged in model metadata, since their rows carry no
    information.
    """
    if len(task.candidates) < 2:
        raise DegenerateTask(
            f"task over {list(task.candidates)} has fewer than two candidates"
        )
    if not (0.0 <= discount < 1.0):
        raise ValueError(f"discount {discount} outside [0, 1)")
    for cid in task.candidates:
        if not scene.has_object(cid):
            raise ValueError(f"candidate {cid!r} is not in the scene")
    if TERMINAL_STATE in task.candidates:
        raise ValueError(f"candidate id {TERMINAL_STATE!r} collides with the terminal state")

    candidates = list(task.candidates)
    n = len(candidates)
    states = candidates + [TERMINAL_STATE]
    actions = [GAZE_ACTION]
    actions += [ask_action(attr) for attr in attributes]
    actions += [project_action(cid) for cid in candidates]

    # Attribute values in candidate first-appearance order define the tokens.
    channel_values: dict[str, list[str]] = {}
    for attr in attributes:
        seen: list[str] = []
        for cid in candidates:
            v = getattr(scene.object(cid), attr)
            if v not in seen:
                seen.append(v)
        channel_values[attr] = seen

    observations = [gaze_token(cid) for cid in candidates]
    for attr in attributes:
        observations += [attribute_token(attr, v) for v in channel_values[attr]]
    observations.append(NULL_TOKEN)

    n_s, n_a, n_z = len(states), len(actions), len(observations)
    transition = np.zeros((n_a, n_s, n_s))
    observation_fn = np.zeros((n_a, n_s, n_z))
    reward = np.zeros((n_s, n_a))
    null_index = n_z - 1

    warnings = []
    for ai, action in enumerate(actions):
        if action == GAZE_ACTION or action.startswith("ask_"):
            transition[ai] = np.eye(n_s)
        else:
            transition[ai, :, n_s - 1] = 1.0
        observation_fn[ai, n_s - 1, null_index] = 1.0

    for si, cid in enumerate(candidates):
        row = gaze_observation_row(scene, task, cid, obs)
        observation_fn[0, si, 0:n] = row

    offset = n
    for attr_i, attr in enumerate(attributes):
        values = channel_values[attr]
        tokens = [attribute_token(attr, v) for v in values]
        ai = 1 + attr_i
        for si, cid in enumerate(candidates):
            true_value = getattr(scene.object(cid), attr)
            observation_fn[ai, si, offset : offset + len(tokens)] = _ask_row(
                values, tokens, true_value, obs.p_correct
            )
        if len(values) == 1:
            warnings.append(
                f"ask_{attr} is uninformative: every candidate has {attr} {values[0]!r}"
            )
        offset += len(tokens)

    for ai in range(1 + len(attributes), n_a):
        observation_fn[ai, :, null_index] = 1.0

    for si in range(n):
        reward[si, 0] = rew.c_gaze
        for attr_i in range(len(attributes)):
            reward[si, 1 + attr_i] = rew.c_ask
        for pj, cid in enumerate(candidates):
            ai = 1 + len(attributes) + pj
            reward[si, ai] = rew.r_correct if si == pj else rew.r_incorrect

    return PomdpModel(
        states=tuple(states),
        actions=tuple(actions),
        observations=tuple(observations),
        transition=transition,
        observation_fn=observation_fn,
        reward=reward,
        discount=discount,
        metadata={
            "warnings": warnings,
            "attributes": list(attributes),
            "observation": asdict(obs),
            "rewards": asdict(rew),
        },
    )


# ---------------------------------------------------------------------------
# Utterances and questions


@dataclass(frozen=True)
class ParsedUtterance:
    """Outcome of parsing one utterance against an expected category.

    ``kind`` is "color", "size", "confirmation", or "unknown"; ``value``
    holds the normalized attribute value or the boolean answer.
    """

    kind: str
    value: str | bool | None = None

    @property
    def is_unknown(self) -> bool:
        return self.kind == "unknown"

    def observation_token(self) -> str:
        if self.kind not in ("color", "size"):
            raise ValueError(f"{self.kind} parse has no observation token")
        return attribute_token(self.kind, self.value)


UNKNOWN = ParsedUtterance("unknown")


def parse_utterance(text: str, expected: str) -> ParsedUtterance:
    """Match an utterance against the grammar for one expected category.

    Case-insensitive; filler words are stripped; only words of the expected
    category count.  No match, or two conflicting matches, yield an unknown
    parse, never an exception.
    """
    if expected not in ("color", "size", "confirmation"):
        raise ValueError(f"unknown expected category {expected!r}")
    words = [w for w in text.lower().split() if w and w not in FILLER_WORDS]
    found: list = []
    for w in words:
        if expected == "color" and w in COLOR_WORDS:
            found.append(w)
        elif expected == "size" and w in SIZE_SYNONYMS:
            found.append(SIZE_SYNONYMS[w])
        elif expected == "confirmation" and w in CONFIRM_WORDS:
            found.append(CONFIRM_WORDS[w])
    distinct = set(found)
    if len(distinct) != 1:
        return UNKNOWN
    value = found[0]
    if expected == "confirmation":
        return ParsedUtterance("confirmation", value)
    return ParsedUtterance(expected, value)


def generate_question(action: str, scene: Scene) -> str:
    """Deterministic question text for an ask, gaze, or confirmation step."""
    if action == GAZE_ACTION:
        return "Please look at the object you want next."
    if action.startswith("ask_"):
        attribute = action[len("ask_"):]
        return f"What {attribute} is the object you want?"
    if action.startswith("project_"):
        obj = scene.object(project_target(action))
        return f"Place the {obj.size} {obj.color} block here. Is this correct?"
    raise ValueError(f"no question template for action {action!r}")
