"""Finite discrete POMDPs: models, belief arithmetic, and alpha-vector policies.

A model couples ordered state/action/observation labels with dense tensors:
``transition[a][s][s']`` and ``observation_fn[a][s'][z]`` are conditional
probabilities, ``reward[s][a]`` is unconstrained in sign, and the discount
lies in ``[0, 1)``.  Beliefs are probability vectors over states.  A policy
is a set of alpha vectors, each tagged with an action; its value function is
the pointwise maximum of the vector inner products, which is convex and
piecewise linear in the belief.

All operations here are pure; models and policies are treated as immutable
after construction (their arrays are marked read-only).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

# Probability rows and beliefs must sum to one within this tolerance.
SUM_TOL = 1e-9

# Serialized model documents carry exactly these fields.
MODEL_FIELDS = (
    "states",
    "actions",
    "observations",
    "transition",
    "observation_fn",
    "reward",
    "discount",
)

ACTION_KINDS = ("gaze", "ask", "project", "other")


class ImpossibleObservation(ValueError):
    """An observation with zero probability under (belief, action) was ingested.

    This signals a mismatch between the model and the observation feed, so it
    is an error rather than a silent reset; session layers must surface it.
    """


class ModelValidationError(ValueError):
    """A model document violated the stochasticity or label invariants."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid POMDP model:\n" + "\n".join(self.violations))


def action_kind(label: str) -> str:
    """Classify an action label as one of gaze / ask / project / other.

    The kind is carried by the label prefix so that serialized models stay
    plain string arrays.
    """
    base = label.split("_", 1)[0]
    return base if base in ("gaze", "ask", "project") else "other"


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PomdpModel:
    """Dense finite POMDP.

    ``metadata`` is a free-form annotation dict (build warnings and the like);
    it is not part of the serialized document.
    """

    states: tuple[str, ...]
    actions: tuple[str, ...]
    observations: tuple[str, ...]
    transition: np.ndarray
    observation_fn: np.ndarray
    reward: np.ndarray
    discount: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "observations", tuple(self.observations))
        object.__setattr__(self, "transition", _frozen_array(self.transition))
        object.__setattr__(self, "observation_fn", _frozen_array(self.observation_fn))
        object.__setattr__(self, "reward", _frozen_array(self.reward))
        object.__setattr__(self, "discount", float(self.discount))
        n_s, n_a, n_z = len(self.states), len(self.actions), len(self.observations)
        if self.transition.shape != (n_a, n_s, n_s):
            raise ValueError(
                f"transition shape {self.transition.shape} != {(n_a, n_s, n_s)}"
            )
        if self.observation_fn.shape != (n_a, n_s, n_z):
            raise ValueError(
                f"observation_fn shape {self.observation_fn.shape} != {(n_a, n_s, n_z)}"
            )
        if self.reward.shape != (n_s, n_a):
            raise ValueError(f"reward shape {self.reward.shape} != {(n_s, n_a)}")

    @cached_property
    def _state_index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def _action_index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.actions)}

    @cached_property
    def _obs_index(self) -> dict[str, int]:
        return {z: i for i, z in enumerate(self.observations)}

    def state_index(self, label: str) -> int:
        try:
            return self._state_index[label]
        except KeyError:
            raise KeyError(f"unknown state label {label!r}") from None

    def action_index(self, label: str) -> int:
        try:
            return self._action_index[label]
        except KeyError:
            raise KeyError(f"unknown action label {label!r}") from None

    def obs_index(self, label: str) -> int:
        try:
            return self._obs_index[label]
        except KeyError:
            raise KeyError(f"unknown observation label {label!r}") from None

    @cached_property
    def terminal_states(self) -> frozenset[int]:
        """States that self-loop under every action and never pay reward.

        Episode rollouts stop when the sampled state is terminal; the tag is
        derived from the tensors so serialized documents stay minimal.
        """
        out = []
        for s in range(len(self.states)):
            if np.all(np.abs(self.reward[s, :]) == 0.0) and np.all(
                np.abs(self.transition[:, s, s] - 1.0) < 1e-12
            ):
                out.append(s)
        return frozenset(out)


def validate_model(model: PomdpModel) -> list[str]:
    """Check all model invariants, returning one description per violation.

    Reports rather than raises; an empty list means the model is well formed.
    """
    v: list[str] = []
    for name, labels in (
        ("states", model.states),
        ("actions", model.actions),
        ("observations", model.observations),
    ):
        if not labels:
            v.append(f"{name} is empty")
        if len(set(labels)) != len(labels):
            v.append(f"{name} contains duplicate labels")
    if not (0.0 <= model.discount < 1.0):
        v.append(f"discount {model.discount} outside [0, 1)")
    for tensor, name in ((model.transition, "transition"), (model.observation_fn, "observation_fn")):
        bad = (tensor < 0.0) | (tensor > 1.0)
        for idx in np.argwhere(bad):
            v.append(f"{name}{list(idx)} = {tensor[tuple(idx)]:.9g} outside [0, 1]")
    for a in range(len(model.actions)):
        row_sums = model.transition[a].sum(axis=1)
        for s in np.flatnonzero(np.abs(row_sums - 1.0) > SUM_TOL):
            v.append(
                f"transition[a={a}][s={s}] rows sum to {row_sums[s]:.12g} (expected 1 within {SUM_TOL})"
            )
        obs_sums = model.observation_fn[a].sum(axis=1)
        for s in np.flatnonzero(np.abs(obs_sums - 1.0) > SUM_TOL):
            v.append(
                f"observation_fn[a={a}][s'={s}] rows sum to {obs_sums[s]:.12g} (expected 1 within {SUM_TOL})"
            )
    if not np.all(np.isfinite(model.reward)):
        v.append("reward contains non-finite entries")
    return v


def assert_valid_model(model: PomdpModel) -> PomdpModel:
    violations = validate_model(model)
    if violations:
        raise ModelValidationError(violations)
    return model


# ---------------------------------------------------------------------------
# Beliefs


def make_belief(probs: Iterable[float]) -> np.ndarray:
    """Validate a probability vector and return it exactly normalized."""
    b = np.array(list(probs), dtype=float)
    if b.ndim != 1 or b.size == 0:
        raise ValueError("belief must be a nonempty vector")
    if np.any(b < 0.0):
        raise ValueError(f"belief has negative entries: {b.tolist()}")
    total = float(b.sum())
    if abs(total - 1.0) > SUM_TOL:
        raise ValueError(f"belief sums to {total:.12g}, expected 1 within {SUM_TOL}")
    b /= total
    b.setflags(write=False)
    return b


def uniform_belief(model: PomdpModel, over: Sequence[str] | None = None) -> np.ndarray:
    """Uniform belief over all states, or over the given subset of labels."""
    n = len(model.states)
    b = np.zeros(n)
    if over is None:
        b[:] = 1.0 / n
    else:
        idx = [model.state_index(s) for s in over]
        if not idx:
            raise ValueError("cannot build a belief over an empty state subset")
        b[idx] = 1.0 / len(idx)
    b.setflags(write=False)
    return b


def point_belief(model: PomdpModel, state: str) -> np.ndarray:
    b = np.zeros(len(model.states))
    b[model.state_index(state)] = 1.0
    b.setflags(write=False)
    return b


def _check_belief_shape(model: PomdpModel, b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.shape != (len(model.states),):
        raise ValueError(f"belief shape {b.shape} does not match |S|={len(model.states)}")
    return b


def observation_probability(model: PomdpModel, b, a: str, z: str) -> float:
    """p(z | b, a): the normalizer of the belief update."""
    b = _check_belief_shape(model, b)
    ai, zi = model.action_index(a), model.obs_index(z)
    predicted = model.transition[ai].T @ b
    return float(model.observation_fn[ai, :, zi] @ predicted)


def belief_update(model: PomdpModel, b, a: str, z: str) -> np.ndarray:
    """Bayes update of the belief after taking action a and observing z.

    The posterior over next states is proportional to
    ``observation_fn[a][s'][z] * sum_s transition[a][s][s'] * b[s]`` and is
    renormalized exactly.  Raises ImpossibleObservation when the observation
    has zero probability; the input belief is never modified.
    """
    b = _check_belief_shape(model, b)
    ai, zi = model.action_index(a), model.obs_index(z)
    unnorm = model.observation_fn[ai, :, zi] * (model.transition[ai].T @ b)
    total = float(unnorm.sum())
    if total <= 0.0:
        raise ImpossibleObservation(
            f"observation {z!r} has zero probability after action {a!r}"
        )
    posterior = unnorm / total
    posterior.setflags(write=False)
    return posterior


def observation_distribution(model: PomdpModel, b, a_index: int):
    """All-observation expansion of one action: (p(z|b,a), posterior rows).

    Returns ``(probs, posteriors)`` with shapes (|Z|,) and (|Z|, |S|); rows
    for zero-probability observations are left as zeros.  Index-based helper
    shared by the solver and the episode engine.
    """
    b = _check_belief_shape(model, b)
    predicted = model.transition[a_index].T @ b
    unnorm = model.observation_fn[a_index].T * predicted[np.newaxis, :]
    probs = unnorm.sum(axis=1)
    posteriors = np.zeros_like(unnorm)
    positive = probs > 0.0
    posteriors[positive] = unnorm[positive] / probs[positive, np.newaxis]
    return probs, posteriors


def expected_reward(model: PomdpModel, b, a: str) -> float:
    """Belief-weighted immediate reward of an action."""
    b = _check_belief_shape(model, b)
    return float(model.reward[:, model.action_index(a)] @ b)


# ---------------------------------------------------------------------------
# Alpha vectors and policies


@dataclass(frozen=True, eq=False)
class AlphaVector:
    """Linear value function over states, tagged with its greedy action."""

    values: np.ndarray
    action: str

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        if self.values.ndim != 1:
            raise ValueError("alpha vector values must be one-dimensional")


@dataclass
class PolicySet:
    """Nonempty set of alpha vectors; the value function is their max."""

    vectors: list[AlphaVector]

    def __post_init__(self):
        if not self.vectors:
            raise ValueError("policy needs at least one alpha vector")
        n = len(self.vectors[0].values)
        if any(len(v.values) != n for v in self.vectors):
            raise ValueError("alpha vectors have inconsistent lengths")

    def matrix(self) -> np.ndarray:
        return np.stack([v.values for v in self.vectors])


def value(policy: PolicySet, b) -> float:
    """V(b) = max over alpha vectors of the inner product with the belief."""
    b = np.asarray(b, dtype=float)
    if b.shape != (len(policy.vectors[0].values),):
        raise ValueError(
            f"belief shape {b.shape} does not match vector length {len(policy.vectors[0].values)}"
        )
    return float(np.max(policy.matrix() @ b))


def best_action(policy: PolicySet, b, action_order: Sequence[str] | None = None) -> str:
    """Action tag of an arg-max vector at the belief.

    Exact ties are broken by lowest action index when ``action_order`` is
    given (normally the model's action list), else by first appearance in the
    policy.  Either way the choice is deterministic.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (len(policy.vectors[0].values),):
        raise ValueError(
            f"belief shape {b.shape} does not match vector length {len(policy.vectors[0].values)}"
        )
    dots = policy.matrix() @ b
    best = float(np.max(dots))
    tied = [i for i, d in enumerate(dots) if d == best]
    if action_order is not None:
        rank = {a: k for k, a in enumerate(action_order)}
        tied.sort(key=lambda i: (rank.get(policy.vectors[i].action, len(rank)), i))
    return policy.vectors[tied[0]].action


# ---------------------------------------------------------------------------
# Serialization


def model_to_dict(model: PomdpModel) -> dict:
    return {
        "states": list(model.states),
        "actions": list(model.actions),
        "observations": list(model.observations),
        "transition": model.transition.tolist(),
        "observation_fn": model.observation_fn.tolist(),
        "reward": model.reward.tolist(),
        "discount": model.discount,
    }


def model_from_dict(doc: dict) -> PomdpModel:
    missing = [f for f in MODEL_FIELDS if f not in doc]
    if missing:
        raise ModelValidationError([f"model document missing field {f!r}" for f in missing])
    model = PomdpModel(
        states=doc["states"],
        actions=doc["actions"],
        observations=doc["observations"],
        transition=doc["transition"],
        observation_fn=doc["observation_fn"],
        reward=doc["reward"],
        discount=doc["discount"],
    )
    return assert_valid_model(model)


def save_model(model: PomdpModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path) -> PomdpModel:
    return model_from_dict(json.loads(Path(path).read_text()))


def policy_to_dict(policy: PolicySet) -> list[dict]:
    return [{"action": v.action, "values": v.values.tolist()} for v in policy.vectors]


def policy_from_dict(doc: Sequence[dict]) -> PolicySet:
    return PolicySet([AlphaVector(values=e["values"], action=e["action"]) for e in doc])


def save_policy(policy: PolicySet, path) -> None:
    Path(path).write_text(json.dumps(policy_to_dict(policy), indent=2) + "\n")


def load_policy(path) -> PolicySet:
    return policy_from_dict(json.loads(Path(path).read_text()))
