"""Solve the worked three-block model and walk the policy across beliefs.

Run: python3 demos/solve_and_inspect.py
"""

import numpy as np

from intentstack import (
    ObservationConfig,
    RewardConfig,
    SolverConfig,
    best_action,
    build_model,
    make_belief,
    point_belief,
    solve,
    uniform_belief,
    value,
)
from intentstack.presets import demo_scene, three_block_task

scene = demo_scene()
task = three_block_task()
print("candidates:", task.candidates, "target:", task.target)

model = build_model(scene, task, ObservationConfig(p_correct=0.8),
                    RewardConfig(), discount=0.99)
print("states:", model.states)
print("actions:", model.actions)

b0 = uniform_belief(model, over=model.states[:-1])
policy, stats = solve(model, b0, SolverConfig(epsilon=0.05, max_seconds=None))
print(f"\nsolved: {stats.backups_done} backups, "
      f"bounds [{stats.root_lower:.3f}, {stats.root_upper:.3f}], "
      f"converged={stats.converged}, {len(policy.vectors)} alpha vectors")

# The interesting question is where the policy stops gathering information
# and commits.  Sweep beliefs concentrated on green with the rest split
# evenly and watch the switch happen.
green = model.state_index("green")
print("\nbelief in green   best action        V(b)")
for p in (1 / 3, 0.6, 0.8, 0.9, 0.95, 0.97, 0.98, 0.99, 1.0):
    probs = [(1.0 - p) / 2.0] * len(model.states)
    probs[green] = p
    probs[-1] = 0.0  # terminal state never holds mass before commitment
    b = make_belief(probs)
    print(f"    {p:.3f}        {best_action(policy, b, model.actions):<16} "
          f"{value(policy, b):8.2f}")

# Point masses commit immediately, and on the right object.
for name in task.candidates:
    b = point_belief(model, name)
    print(f"\ncertain it is {name}: {best_action(policy, b, model.actions)}")
