"""Play one scripted interaction and print the event log as a transcript.

A cooperative person wants the green, red, and blue blocks stacked, in
that order.  They always look at the block they mean, answer questions
truthfully, and confirm correct previews.

Run: python3 demos/run_demo_episode.py
"""

from intentstack import (
    ObservationConfig,
    PolicyCache,
    RewardConfig,
    Session,
    SolverConfig,
    check_stability,
)
from intentstack.episode import (
    AWAITING_ANSWER,
    AWAITING_CONFIRMATION,
    AWAITING_GAZE,
    DONE,
)
from intentstack.presets import DEMO_INTENTS, demo_scene, demo_tasks

scene = demo_scene()
session = Session(scene, demo_tasks(), ObservationConfig(), RewardConfig(),
                  0.99, policy_cache=PolicyCache(SolverConfig(epsilon=0.5)))
session.advance()

while session.phase != DONE:
    intent = DEMO_INTENTS[session.task_index]
    if session.phase == AWAITING_GAZE:
        session.ingest_gaze(scene.object(intent).position)
    elif session.phase == AWAITING_ANSWER:
        session.ingest_utterance(getattr(scene.object(intent),
                                         session.pending_attribute))
    elif session.phase == AWAITING_CONFIRMATION:
        session.confirm(session.pending_candidate == intent)
    session.advance()

for event in session.events:
    kind = event["kind"]
    payload = event["payload"]
    if kind == "belief":
        bars = ", ".join(f"{s} {p:.2f}"
                         for s, p in zip(payload["states"], payload["belief"]))
        line = f"belief: {bars}"
    elif kind == "question":
        line = f'robot asks: "{payload["text"]}"'
    elif kind == "utterance_input":
        line = f'person says: "{payload["text"]}"'
    elif kind == "gaze_request":
        line = "robot requests a glance"
    elif kind == "gaze_input":
        x, y = payload["point"]
        line = f"person looks at ({x:.0f}, {y:.0f})"
    elif kind == "projection":
        line = (f"robot previews {payload['candidate']} "
                f"(stable={payload['report']['stable']})")
    elif kind == "confirmation_input":
        line = "person confirms" if payload["answer"] else "person rejects"
    elif kind == "robot_action":
        line = f"robot stacks {payload['object_id']}"
    else:
        line = kind
    print(f"[{event['step']:>3}] {line}")

print("\nfinal stack, bottom to top:",
      [layer.object_id for layer in session.stack.layers])
report = check_stability(session.stack, session.scene)
print("stable:", report.stable,
      " margins (mm):", tuple(round(m, 1) for m in report.margins))
