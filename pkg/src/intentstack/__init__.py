"""Belief-space planning for intent disambiguation with checked block stacking.

The package turns a tabletop scene and a queue of stacking tasks into small
discrete POMDPs over candidate objects, solves them offline to bounded
suboptimality, and runs the interaction loop in which an agent requests gaze,
asks attribute questions, previews physically checked placements, and commits
only on human confirmation.  Episode logs replay deterministically; a session
service exposes the loop over HTTP + WebSocket.
"""

from .episode import (
    EpisodeResult,
    ObjectOutcome,
    PhaseError,
    PolicyCache,
    Session,
    SimulatedHuman,
    batch_simulate,
    run_episode,
    simulation_config_document,
)
from .eventlog import CorruptLog, EventLogWriter, ReplayResult, read_log, replay_log, write_log
from .intent import (
    DegenerateTask,
    IntentTask,
    ObservationConfig,
    ParsedUtterance,
    RewardConfig,
    build_model,
    generate_question,
    parse_utterance,
)
from .pomdp import (
    AlphaVector,
    ImpossibleObservation,
    ModelValidationError,
    PolicySet,
    PomdpModel,
    belief_update,
    best_action,
    load_model,
    load_policy,
    make_belief,
    point_belief,
    save_model,
    save_policy,
    uniform_belief,
    validate_model,
    value,
)
from .scene import (
    PlacementPlan,
    Pose,
    Scene,
    SceneObject,
    StabilityReport,
    StackLayer,
    StackState,
    load_scene,
    save_scene,
)
from .solver import SolveStats, SolverConfig, backup, evaluate_policy, prune_policy, solve
from .stacking import (
    StabilityRefused,
    apply_placement,
    check_collision,
    check_stability,
    project_future_state,
    resolve_plan,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaVector",
    "CorruptLog",
    "DegenerateTask",
    "EpisodeResult",
    "EventLogWriter",
    "ImpossibleObservation",
    "IntentTask",
    "ModelValidationError",
    "ObjectOutcome",
    "ObservationConfig",
    "ParsedUtterance",
    "PhaseError",
    "PlacementPlan",
    "PolicyCache",
    "PolicySet",
    "PomdpModel",
    "Pose",
    "ReplayResult",
    "RewardConfig",
    "Scene",
    "SceneObject",
    "Session",
    "SimulatedHuman",
    "SolveStats",
    "SolverConfig",
    "StabilityRefused",
    "StabilityReport",
    "StackLayer",
    "StackState",
    "apply_placement",
    "backup",
    "batch_simulate",
    "belief_update",
    "best_action",
    "build_model",
    "check_collision",
    "check_stability",
    "evaluate_policy",
    "generate_question",
    "load_model",
    "load_policy",
    "load_scene",
    "make_belief",
    "parse_utterance",
    "point_belief",
    "project_future_state",
    "prune_policy",
    "read_log",
    "replay_log",
    "resolve_plan",
    "run_episode",
    "save_model",
    "save_policy",
    "save_scene",
    "simulation_config_document",
    "solve",
    "uniform_belief",
    "validate_model",
    "value",
    "write_log",
]
