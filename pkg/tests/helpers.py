"""Small hand-built models shared across test modules."""

from __future__ import annotations

import numpy as np

from intentstack.intent import ObservationConfig, RewardConfig, build_model
from intentstack.pomdp import PomdpModel
from intentstack.presets import demo_scene, three_block_task, two_block_task


def signal_model(p_correct: float = 0.8, discount: float = 0.9) -> PomdpModel:
    """Two hidden states, one listen action, one noisy signal per state."""
    return PomdpModel(
        states=("s0", "s1"),
        actions=("listen",),
        observations=("sig0", "sig1"),
        transition=np.eye(2)[None, :, :],
        observation_fn=np.array([[[p_correct, 1.0 - p_correct], [1.0 - p_correct, p_correct]]]),
        reward=np.zeros((2, 1)),
        discount=discount,
    )


def chain_model(discount: float = 0.99) -> PomdpModel:
    """Deterministic two-step chain: s0 -> s1 -> goal(+100), step cost -1."""
    transition = np.zeros((1, 3, 3))
    transition[0, 0, 1] = 1.0
    transition[0, 1, 2] = 1.0
    transition[0, 2, 2] = 1.0
    observation_fn = np.zeros((1, 3, 1))
    observation_fn[:, :, 0] = 1.0
    reward = np.array([[-1.0], [99.0], [0.0]])
    return PomdpModel(
        states=("s0", "s1", "goal"),
        actions=("step",),
        observations=("null",),
        transition=transition,
        observation_fn=observation_fn,
        reward=reward,
        discount=discount,
    )


def three_block_model(discount: float = 0.99) -> PomdpModel:
    return build_model(
        demo_scene(), three_block_task(), ObservationConfig(), RewardConfig(), discount
    )


def two_object_model(discount: float = 0.99) -> PomdpModel:
    return build_model(demo_scene(), two_block_task(), ObservationConfig(), RewardConfig(), discount)
