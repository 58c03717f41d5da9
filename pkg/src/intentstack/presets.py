"""Canonical demo world: one large green block, small red, blue, and yellow.

The green, red, and blue blocks reproduce the three-block stacking
demonstration; the yellow block is a distractor so that every staged task
keeps at least two candidates (a one-candidate task needs no planner and is
rejected at configuration time).  All coordinates are integer millimetres.
"""

from __future__ import annotations

from .episode import SimulatedHuman, simulation_config_document
from .intent import IntentTask, ObservationConfig, RewardConfig
from .scene import Scene, SceneObject

DEMO_DISCOUNT = 0.99
DEMO_INTENTS = ("green", "red", "blue")


def demo_scene() -> Scene:
    return Scene(
        objects=(
            SceneObject("green", "green", "large", (80, 80), 60, (-300, 150)),
            SceneObject("red", "red", "small", (40, 40), 40, (-100, 150)),
            SceneObject("blue", "blue", "small", (40, 40), 40, (100, 150)),
            SceneObject("yellow", "yellow", "small", (40, 40), 40, (300, 150)),
        ),
        table=(1000, 1000),
        targets={"stack": (0, -250)},
    )


def demo_tasks() -> list[IntentTask]:
    """Three stacking steps; later steps drop the already-stacked blocks."""
    return [
        IntentTask(candidates=("green", "red", "blue", "yellow"), target="stack"),
        IntentTask(candidates=("red", "blue", "yellow"), target="stack"),
        IntentTask(candidates=("blue", "yellow"), target="stack"),
    ]


def three_block_task() -> IntentTask:
    """The plain three-block candidate set, without the distractor."""
    return IntentTask(candidates=("green", "red", "blue"), target="stack")


def two_block_task() -> IntentTask:
    """Two-candidate reduction used for threshold studies."""
    return IntentTask(candidates=("green", "red"), target="stack")


def demo_human(
    gaze_accuracy: float = 1.0,
    answer_accuracy: float = 1.0,
    confirm_mode: str = "truthful",
    seed: int = 0,
) -> SimulatedHuman:
    return SimulatedHuman(
        intents=DEMO_INTENTS,
        gaze_accuracy=gaze_accuracy,
        answer_accuracy=answer_accuracy,
        confirm_mode=confirm_mode,
        seed=seed,
    )


def demo_simulation_config(
    gaze_accuracy: float = 0.8,
    answer_accuracy: float = 0.8,
    confirm_mode: str = "truthful",
    epsilon: float = 0.5,
) -> dict:
    return simulation_config_document(
        scene=demo_scene(),
        tasks=demo_tasks(),
        human=demo_human(gaze_accuracy, answer_accuracy, confirm_mode),
        obs=ObservationConfig(),
        rew=RewardConfig(),
        discount=DEMO_DISCOUNT,
        epsilon=epsilon,
    )


def demo_session_config(epsilon: float = 0.5) -> dict:
    """The service-facing config for a live demo session."""
    config = demo_simulation_config(epsilon=epsilon)
    config.pop("human")
    config.pop("step_cap")
    return config
